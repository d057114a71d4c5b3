import init, { output_cloud, fisher_curve, singularity_map } from "./pkg/homodyne_u2_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function showValues(root) {
  for (const input of root.querySelectorAll("input[type=range]")) {
    const out = input.parentElement.querySelector("output");
    if (out) out.textContent = input.value;
  }
}

// Output cloud with 1σ and 2σ ellipses of the predicted covariance.
function drawCloud() {
  showValues($("cloud"));
  const ctx = $("c-canvas").getContext("2d");
  const { width: w, height: h } = ctx.canvas;
  ctx.clearRect(0, 0, w, h);
  let v;
  try {
    v = output_cloud(num("c-phi0"), num("c-phi1"), num("c-phi2"), num("c-phi3"),
      0.5, 0.5, num("c-n"), num("c-beta"), parseInt($("c-m").value), parseInt($("c-seed").value) >>> 0);
  } catch (e) {
    $("c-info").textContent = String(e.message ?? e);
    $("c-info").className = "note err";
    return;
  }
  const [m1, m2, s11, s12, s22] = v;
  const pts = v.subarray(5);
  let span = 3 * Math.sqrt(Math.max(s11, s22)) + Math.max(Math.abs(m1), Math.abs(m2));
  for (let i = 0; i < pts.length; i++) span = Math.max(span, Math.abs(pts[i]) * 1.05);
  const sx = (x) => w / 2 + (x / span) * (w / 2);
  const sy = (y) => h / 2 - (y / span) * (h / 2);

  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.stroke();

  ctx.fillStyle = "rgba(31, 119, 180, 0.35)";
  for (let i = 0; i < pts.length; i += 2) ctx.fillRect(sx(pts[i]) - 1, sy(pts[i + 1]) - 1, 2, 2);

  const tr = s11 + s22, det = s11 * s22 - s12 * s12;
  const disc = Math.sqrt(Math.max(tr * tr / 4 - det, 0));
  const l1 = tr / 2 + disc, l2 = tr / 2 - disc;
  const angle = 0.5 * Math.atan2(2 * s12, s11 - s22);
  ctx.strokeStyle = "#d62728";
  for (const c of [1, 2]) {
    ctx.beginPath();
    for (let t = 0; t <= 64; t++) {
      const a = (2 * Math.PI * t) / 64;
      const u = c * Math.sqrt(l1) * Math.cos(a), q = c * Math.sqrt(l2) * Math.sin(a);
      const x = m1 + u * Math.cos(angle) - q * Math.sin(angle);
      const y = m2 + u * Math.sin(angle) + q * Math.cos(angle);
      t === 0 ? ctx.moveTo(sx(x), sy(y)) : ctx.lineTo(sx(x), sy(y));
    }
    ctx.stroke();
  }
  $("c-info").className = "note";
  $("c-info").textContent =
    `μ = (${m1.toFixed(3)}, ${m2.toFixed(3)}), Σ = [[${s11.toFixed(4)}, ${s12.toFixed(4)}], [${s12.toFixed(4)}, ${s22.toFixed(4)}]], ` +
    `axes ${l1.toFixed(3)} / ${l2.toFixed(4)} (vacuum 0.5). Horizontal x1, vertical x2.`;
}

function drawCurve() {
  const ctx = $("f-canvas").getContext("2d");
  const { width: w, height: h } = ctx.canvas;
  ctx.clearRect(0, 0, w, h);
  let v;
  try {
    v = fisher_curve(num("f-k1"), num("f-k2"), num("f-k3"), num("f-beta"), 3, 1e5, 80);
  } catch (e) {
    $("f-info").textContent = `refused: ${e.message ?? e}`;
    $("f-info").className = "note err";
    return;
  }
  const plateau = v[0];
  const xs = [], ys = [];
  for (let i = 1; i < v.length; i += 2) { xs.push(Math.log10(v[i])); ys.push(Math.log10(v[i + 1])); }
  const lo = Math.min(...ys, Math.log10(plateau)) - 0.1, hi = Math.max(...ys, Math.log10(plateau)) + 0.1;
  const pad = 50;
  const px = (x) => pad + ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - lo) / (hi - lo)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  for (let d = Math.ceil(xs[0]); d <= xs[xs.length - 1]; d++) ctx.fillText(`1e${d}`, px(d) - 10, h - pad + 16);
  ctx.fillText("N", w / 2, h - 10);
  ctx.fillText(hi.toFixed(2) === lo.toFixed(2) ? "" : `${Math.pow(10, hi).toPrecision(3)}`, 4, pad + 4);
  ctx.fillText(`${Math.pow(10, lo).toPrecision(3)}`, 4, h - pad);

  ctx.setLineDash([5, 4]);
  ctx.strokeStyle = "#d62728";
  ctx.beginPath();
  ctx.moveTo(pad, py(Math.log10(plateau)));
  ctx.lineTo(w - pad, py(Math.log10(plateau)));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = "#1f77b4";
  ctx.lineWidth = 2;
  ctx.beginPath();
  xs.forEach((x, i) => (i === 0 ? ctx.moveTo(px(x), py(ys[i])) : ctx.lineTo(px(x), py(ys[i]))));
  ctx.stroke();
  ctx.lineWidth = 1;

  const last = Math.pow(10, ys[ys.length - 1]);
  $("f-info").className = "note";
  $("f-info").textContent = `plateau Tr[𝓕⁻¹] = ${plateau.toFixed(4)} (dashed); at N = 1e5 the exact value is ${last.toFixed(4)}.`;
}

function colour(t) {
  // dark blue (singular) to pale yellow
  const r = Math.round(20 + 235 * t), g = Math.round(30 + 210 * t), b = Math.round(110 + 60 * (1 - t));
  return [r, g, b];
}

function drawMap() {
  showValues($("map"));
  const ctx = $("s-canvas").getContext("2d");
  const { width: w, height: h } = ctx.canvas;
  const res = 140, span = 2, k3 = num("s-k3");
  const v = singularity_map(k3, num("s-beta"), span, res);
  const img = ctx.createImageData(res, res);
  for (let i = 0; i < res; i++) {
    for (let j = 0; j < res; j++) {
      const e = Math.max(v[i * res + j], 1e-12);
      const t = Math.min(Math.max((Math.log10(e) + 8) / 8, 0), 1);
      const [r, g, b] = colour(t);
      const p = 4 * ((res - 1 - j) * res + i);
      img.data.set([r, g, b, 255], p);
    }
  }
  const off = new OffscreenCanvas(res, res);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, w, h);

  const sx = (k) => ((k + span) / (2 * span)) * w;
  const sy = (k) => h - ((k + span) / (2 * span)) * h;
  ctx.strokeStyle = "#fff";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(sx(-span), sy(span)); ctx.lineTo(sx(span), sy(-span));
  ctx.stroke();
  // k2 = k3² / k1, both branches
  for (const sign of [1, -1]) {
    ctx.beginPath();
    let started = false;
    for (let t = 1; t <= 400; t++) {
      const k1 = (sign * span * t) / 400, k2 = (k3 * k3) / k1;
      if (Math.abs(k2) > span) { started = false; continue; }
      started ? ctx.lineTo(sx(k1), sy(k2)) : ctx.moveTo(sx(k1), sy(k2));
      started = true;
    }
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

await init();
for (const id of ["c-phi0", "c-phi1", "c-phi2", "c-phi3", "c-n", "c-beta", "c-m", "c-seed"]) $(id).addEventListener("input", drawCloud);
for (const id of ["f-k1", "f-k2", "f-k3", "f-beta"]) $(id).addEventListener("input", drawCurve);
for (const id of ["s-k3", "s-beta"]) $(id).addEventListener("input", drawMap);
drawCloud();
drawCurve();
drawMap();
