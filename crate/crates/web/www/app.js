import init, { phaseDeviation, presetCoherence, aecTraces } from "./pkg/stereo_decorr_web.js";

const $ = (id) => document.getElementById(id);

// Line plot with a fixed y range; series are {ys, color}, x spans [x0, x1].
function plot(canvas, series, { x0, x1, y0, y1, xLabel, yLabel, xTicks, yTicks }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const m = { l: 56, r: 12, t: 10, b: 34 };
  const px = (x) => m.l + ((x - x0) / (x1 - x0)) * (w - m.l - m.r);
  const py = (y) => h - m.b - ((Math.min(Math.max(y, y0), y1) - y0) / (y1 - y0)) * (h - m.t - m.b);
  ctx.clearRect(0, 0, w, h);
  ctx.font = "12px system-ui";
  ctx.strokeStyle = "#e5e5e5";
  ctx.fillStyle = "#555";
  for (const t of xTicks) {
    ctx.beginPath(); ctx.moveTo(px(t), m.t); ctx.lineTo(px(t), h - m.b); ctx.stroke();
    ctx.fillText(String(t), px(t) - 10, h - m.b + 14);
  }
  for (const t of yTicks) {
    ctx.beginPath(); ctx.moveTo(m.l, py(t)); ctx.lineTo(w - m.r, py(t)); ctx.stroke();
    ctx.fillText(String(t), 6, py(t) + 4);
  }
  ctx.fillText(xLabel, w / 2 - 20, h - 4);
  ctx.save(); ctx.translate(12, h / 2); ctx.rotate(-Math.PI / 2); ctx.fillText(yLabel, -20, 0); ctx.restore();
  for (const { ys, color } of series) {
    if (!ys.length) continue;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ys.forEach((y, i) => {
      const x = x0 + ((x1 - x0) * i) / Math.max(ys.length - 1, 1);
      i ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y));
    });
    ctx.stroke();
  }
}

function showError(out, e) {
  out.textContent = `error: ${e.message ?? e}`;
}

function drawPhase() {
  const alpha = Number($("ph-alpha").value);
  const beta = Number($("ph-beta").value);
  const order = Number($("ph-order").value);
  $("ph-alpha-v").textContent = alpha.toFixed(2);
  $("ph-beta-v").textContent = beta.toFixed(2);
  try {
    const dev = phaseDeviation(alpha, beta, order, 2048);
    plot($("ph-plot"), [{ ys: dev, color: "#36c" }], {
      x0: 0, x1: 22.05, y0: -Math.PI, y1: Math.PI,
      xLabel: "frequency (kHz)", yLabel: "phase (rad)",
      xTicks: [0, 5, 10, 15, 20], yTicks: [-3, -2, -1, 0, 1, 2, 3],
    });
    const bound = 0.98 / (1 + beta);
    $("ph-out").textContent = `stable while |alpha| < ${(1 / (1 + beta)).toFixed(3)}; the random walk clamps at ${bound.toFixed(3)}`;
  } catch (e) {
    showError($("ph-out"), e);
  }
}

function runCoherence() {
  const out = $("co-out");
  out.textContent = "running...";
  // Let the status paint before the blocking call.
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const v = presetCoherence($("co-preset").value, Number($("co-secs").value), Number($("co-seed").value));
      const ms = performance.now() - t0;
      const snr = $("co-snr").checked;
      const fs = v.freqs_hz;
      plot($("co-plot"), [{ ys: snr ? v.snr_db : v.gamma_sq, color: "#36c" }], snr
        ? { x0: 0, x1: fs[fs.length - 1] / 1000, y0: -60, y1: 60, xLabel: "frequency (kHz)", yLabel: "SNR (dB)",
            xTicks: [0, 5, 10, 15, 20], yTicks: [-60, -30, 0, 30, 60] }
        : { x0: 0, x1: fs[fs.length - 1] / 1000, y0: 0, y1: 1, xLabel: "frequency (kHz)", yLabel: "coherence",
            xTicks: [0, 5, 10, 15, 20], yTicks: [0, 0.25, 0.5, 0.75, 1] });
      out.textContent = `Bark-weighted coherence ${v.bark_weighted.toFixed(4)} (${ms.toFixed(0)} ms)`;
      v.free();
    } catch (e) {
      showError(out, e);
    }
  }, 10);
}

function runAec() {
  const out = $("aec-out");
  out.textContent = "running...";
  setTimeout(() => {
    try {
      const v = aecTraces($("aec-preset").value, Number($("aec-secs").value), Number($("aec-seed").value));
      const base = v.baseline_db;
      const dec = v.decorrelated_db;
      const secs = base.length * v.block_secs;
      plot($("aec-plot"), [{ ys: base, color: "#c33" }, { ys: dec, color: "#36c" }], {
        x0: 0, x1: secs, y0: -60, y1: 10, xLabel: "time (s)", yLabel: "misalignment (dB)",
        xTicks: [...Array(Math.floor(secs) + 1).keys()], yTicks: [-60, -40, -20, 0],
      });
      const last = (a) => a[a.length - 1];
      out.textContent = dec.length
        ? `final misalignment ${last(base).toFixed(1)} dB without, ${last(dec).toFixed(1)} dB with preset`
        : `final misalignment ${last(base).toFixed(1)} dB`;
      v.free();
    } catch (e) {
      showError(out, e);
    }
  }, 10);
}

await init();
for (const id of ["ph-alpha", "ph-beta", "ph-order"]) $(id).addEventListener("input", drawPhase);
$("co-run").addEventListener("click", runCoherence);
$("co-snr").addEventListener("change", runCoherence);
$("aec-run").addEventListener("click", runAec);
drawPhase();
runCoherence();
