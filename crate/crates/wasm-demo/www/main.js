import init, { performance_curves, teleportation_matrix, asymptotic_curve, maxCurveN } from "./pkg/mpbt_wasm.js";

const COLORS = { p_opt: "#1f5fbf", p_nonopt: "#7fa7e6", f_opt: "#c0392b", f_nonopt: "#eb9a8f", bound: "#999" };
const LABELS = { p_opt: "p (optimal)", p_nonopt: "p (max. entangled)", f_opt: "F (optimal)", f_nonopt: "F (max. entangled)", bound: "1 − 4k/N" };

function formValues(form) {
  return Object.fromEntries(new FormData(form).entries());
}

function legend(el, keys) {
  el.innerHTML = keys.map((k) => `<span><i style="background:${COLORS[k]}"></i>${LABELS[k]}</span>`).join("");
}

function showError(id, err) {
  document.getElementById(id).textContent = err ? String(err.message ?? err) : "";
}

// Line plot of series over xs; y in [yMin, 1].
function plot(canvas, xs, series, { logX = false, yMin = 0, xLabel = "N" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 50, R = 15, T = 15, B = 35;
  ctx.clearRect(0, 0, W, H);
  const fx = logX ? Math.log10 : (v) => v;
  const x0 = fx(xs[0]), x1 = fx(xs[xs.length - 1]);
  const sx = (v) => L + ((fx(v) - x0) / Math.max(x1 - x0, 1e-9)) * (W - L - R);
  const sy = (v) => T + (1 - (v - yMin) / (1 - yMin)) * (H - T - B);

  ctx.strokeStyle = "#ccc";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  for (let i = 0; i <= 5; i++) {
    const v = yMin + ((1 - yMin) * i) / 5;
    ctx.beginPath();
    ctx.moveTo(L, sy(v));
    ctx.lineTo(W - R, sy(v));
    ctx.stroke();
    ctx.fillText(v.toFixed(2), 8, sy(v) + 4);
  }
  const ticks = logX
    ? Array.from({ length: Math.floor(x1) - Math.ceil(x0) + 1 }, (_, i) => 10 ** (Math.ceil(x0) + i))
    : xs.filter((_, i) => i % Math.ceil(xs.length / 10) === 0);
  for (const t of ticks) {
    ctx.fillText(logX ? `1e${Math.round(Math.log10(t))}` : String(t), sx(t) - 8, H - 18);
  }
  ctx.fillText(xLabel, W / 2, H - 3);

  for (const [key, ys] of Object.entries(series)) {
    ctx.strokeStyle = COLORS[key];
    ctx.lineWidth = 2;
    ctx.beginPath();
    ys.forEach((y, i) => {
      const yy = sy(Math.max(yMin, Math.min(1, y)));
      i === 0 ? ctx.moveTo(sx(xs[i]), yy) : ctx.lineTo(sx(xs[i]), yy);
    });
    ctx.stroke();
  }
}

function drawCurves() {
  const form = document.getElementById("curves-form");
  const v = formValues(form);
  const d = Number(v.d);
  form.elements.n.max = String(maxCurveN(d));
  try {
    const points = JSON.parse(performance_curves(Number(v.k), d, Number(v.n)));
    const keys = ["p_opt", "p_nonopt", "f_opt", "f_nonopt"];
    const series = Object.fromEntries(keys.map((k) => [k, points.map((p) => p[k])]));
    plot(document.getElementById("curves"), points.map((p) => p.N), series);
    legend(document.getElementById("curves-legend"), keys);
    showError("curves-error", null);
  } catch (e) {
    showError("curves-error", e);
  }
}

function drawMatrix() {
  const v = formValues(document.getElementById("matrix-form"));
  const canvas = document.getElementById("matrix");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  try {
    const m = JSON.parse(teleportation_matrix(Number(v.n), Number(v.k), Number(v.d)));
    const n = m.order.length;
    const size = Math.min(canvas.height - 20, canvas.width / 2);
    const cell = size / n;
    const max = Math.max(...m.entries.flat());
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < n; j++) {
        const x = m.entries[i][j];
        if (x === 0) continue;
        const shade = Math.round(230 - 200 * Math.log1p(x) / Math.log1p(max));
        ctx.fillStyle = `rgb(${shade},${shade},255)`;
        ctx.fillRect(10 + j * cell, 10 + i * cell, Math.max(cell, 1), Math.max(cell, 1));
        if (cell >= 18) {
          ctx.fillStyle = "#000";
          ctx.font = `${Math.min(12, cell / 2)}px sans-serif`;
          ctx.fillText(String(x), 12 + j * cell, 10 + (i + 0.65) * cell);
        }
      }
    }
    ctx.strokeStyle = "#aaa";
    ctx.strokeRect(10, 10, size, size);
    // Perron vector as bars.
    const left = 30 + size, width = canvas.width - left - 10;
    const vmax = Math.max(...m.vector);
    ctx.fillStyle = "#c0392b";
    m.vector.forEach((x, i) => ctx.fillRect(left, 10 + i * cell, (x / vmax) * width, Math.max(cell - 1, 1)));
    const rows = m.order.length <= 12
      ? `<table class="readout">${m.order.map((lab, i) => `<tr><td>${lab}</td><td>${m.vector[i].toFixed(6)}</td></tr>`).join("")}</table>`
      : "";
    document.getElementById("matrix-info").innerHTML =
      `dimension ${n}, λ<sub>max</sub> = ${m.lambda_max.toFixed(10)}, F<sub>opt</sub> = λ<sub>max</sub>/d<sup>2k</sup> = ${m.f_opt.toFixed(10)}${rows}`;
    showError("matrix-error", null);
  } catch (e) {
    document.getElementById("matrix-info").textContent = "";
    showError("matrix-error", e);
  }
}

function drawAsymptotic() {
  const v = formValues(document.getElementById("asym-form"));
  try {
    const points = JSON.parse(asymptotic_curve(v.rule, Number(v.d), Number(v.exp)));
    const series = { p_opt: points.map((p) => p.p_opt) };
    const keys = ["p_opt"];
    if (v.rule === "sqrt") {
      series.bound = points.map((p) => p.bound);
      keys.push("bound");
    }
    plot(document.getElementById("asym"), points.map((p) => p.N), series, { logX: true });
    legend(document.getElementById("asym-legend"), keys);
    showError("asym-error", null);
  } catch (e) {
    showError("asym-error", e);
  }
}

function bind(id, draw) {
  document.getElementById(id).addEventListener("submit", (ev) => {
    ev.preventDefault();
    draw();
  });
}

await init();
bind("curves-form", drawCurves);
bind("matrix-form", drawMatrix);
bind("asym-form", drawAsymptotic);
drawCurves();
drawMatrix();
drawAsymptotic();
