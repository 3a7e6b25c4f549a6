import init, { compare_algorithms, estimate_grid, checkpoint_trace } from "./pkg/smdk_wasm.js";

const $ = (id) => document.getElementById(id);
const status = $("status");

function params() {
  return {
    utility: $("utility").value,
    n: Number($("n").value),
    window: Number($("window").value),
    slide: Number($("slide").value),
    lambda: Number($("lambda").value),
    beta: Number($("beta").value),
    d: 1,
    seed: Number($("seed").value),
    cost_lo: Number($("cost_lo").value),
    cost_hi: Number($("cost_hi").value),
    with_baseline: $("with_baseline").value === "true",
  };
}

function frame(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = { left: 56, right: 12, top: 12, bottom: 26 };
  const w = canvas.width - pad.left - pad.right;
  const h = canvas.height - pad.top - pad.bottom;
  return { ctx, pad, w, h };
}

function axes(f, xMax, yMax, xLabel) {
  const { ctx, pad, w, h } = f;
  ctx.strokeStyle = "#8886";
  ctx.fillStyle = "#888";
  ctx.font = "11px system-ui";
  ctx.beginPath();
  ctx.moveTo(pad.left, pad.top);
  ctx.lineTo(pad.left, pad.top + h);
  ctx.lineTo(pad.left + w, pad.top + h);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const y = pad.top + h - (h * i) / 4;
    ctx.fillText(((yMax * i) / 4).toPrecision(3), 4, y + 4);
    ctx.strokeStyle = "#8882";
    ctx.beginPath();
    ctx.moveTo(pad.left, y);
    ctx.lineTo(pad.left + w, y);
    ctx.stroke();
  }
  ctx.fillText(xLabel + " " + xMax, pad.left + w - 60, pad.top + h + 18);
}

function polyline(f, xs, ys, xMax, yMax, color) {
  const { ctx, pad, w, h } = f;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  for (let i = 0; i < xs.length; i++) {
    const x = pad.left + (w * xs[i]) / xMax;
    const y = pad.top + h - (h * Math.min(ys[i], yMax)) / yMax;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function drawComparison(data) {
  const slides = data.slides;
  const ts = slides.map((s) => s.t);
  const xMax = ts[ts.length - 1];

  const utilityChart = frame($("utilityChart"));
  const series = [
    ["baseline", "#e4572e"],
    ["kw", "#29a19c"],
    ["kwplus", "#5064eb"],
  ];
  let yMax = 0;
  for (const [key] of series) {
    for (const s of slides) yMax = Math.max(yMax, s[key] ?? 0);
  }
  axes(utilityChart, xMax, yMax * 1.05, "t =");
  for (const [key, color] of series) {
    if (slides[0][key] === undefined || slides[0][key] === null) continue;
    polyline(utilityChart, ts, slides.map((s) => s[key]), xMax, yMax * 1.05, color);
  }

  const storageChart = frame($("storageChart"));
  const storedMax = Math.max(
    data.window,
    ...slides.map((s) => Math.max(s.kw_stored, s.kwplus_stored))
  );
  axes(storageChart, xMax, storedMax * 1.05, "t =");
  polyline(storageChart, ts, slides.map((s) => s.kw_stored), xMax, storedMax * 1.05, "#29a19c");
  polyline(storageChart, ts, slides.map((s) => s.kwplus_stored), xMax, storedMax * 1.05, "#5064eb");
  const ctx = storageChart.ctx;
  ctx.setLineDash([4, 4]);
  polyline(storageChart, [ts[0], xMax], [data.window, data.window], xMax, storedMax * 1.05, "#888");
  ctx.setLineDash([]);
  ctx.fillStyle = "#888";
  ctx.fillText("W", storageChart.pad.left + 6, storageChart.pad.top + 12);
}

let gridSnapshots = [];

function drawGrid() {
  if (!gridSnapshots.length) return;
  const idx = Math.min(Number($("gridT").value) - 1, gridSnapshots.length - 1);
  const snap = gridSnapshots[idx];
  $("gridTLabel").textContent = `t = ${snap.t}, ${snap.estimates.length} candidates, best ${snap.best.toPrecision(4)}`;
  const f = frame($("gridChart"));
  const { ctx, pad, w, h } = f;

  const logMin = Math.log(Math.max(snap.lower, 1e-9)) - 0.3;
  const logMax = Math.log(Math.max(snap.upper, 1e-9)) + 0.3;
  const x = (phi) => pad.left + (w * (Math.log(phi) - logMin)) / (logMax - logMin);
  const yMax = Math.max(snap.best, ...snap.utilities, 1e-9) * 1.1;

  // Estimate range band.
  ctx.fillStyle = "#5064eb18";
  ctx.fillRect(x(snap.lower), pad.top, x(snap.upper) - x(snap.lower), h);
  axes(f, snap.t, yMax, "t =");

  for (let i = 0; i < snap.estimates.length; i++) {
    const cx = x(snap.estimates[i]);
    const height = (h * snap.utilities[i]) / yMax;
    ctx.fillStyle = snap.sizes[i] > 0 ? "#5064eb" : "#8886";
    ctx.fillRect(cx - 2, pad.top + h - height, 4, Math.max(height, 2));
  }
  // Best-so-far line.
  ctx.strokeStyle = "#e4572e";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  const bestY = pad.top + h - (h * snap.best) / yMax;
  ctx.moveTo(pad.left, bestY);
  ctx.lineTo(pad.left + w, bestY);
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawCheckpoints(snapshots) {
  const f = frame($("checkpointChart"));
  const { ctx, pad, w, h } = f;
  const xMax = snapshots[snapshots.length - 1].t;
  axes(f, xMax, xMax, "t =");
  // Window trailing edge.
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  for (let i = 0; i < snapshots.length; i++) {
    const s = snapshots[i];
    const x = pad.left + (w * s.t) / xMax;
    const y = pad.top + h - (h * s.window_start) / xMax;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.fillStyle = "#5064eb";
  for (const s of snapshots) {
    const x = pad.left + (w * s.t) / xMax;
    for (const p of s.positions) {
      const y = pad.top + h - (h * p) / xMax;
      ctx.fillRect(x - 1, y - 1, 2.4, 2.4);
    }
  }
}

async function runAll() {
  status.textContent = "running…";
  const started = performance.now();
  try {
    const p = params();
    const comparison = JSON.parse(compare_algorithms(JSON.stringify(p)));
    drawComparison(comparison);

    gridSnapshots = JSON.parse(estimate_grid(JSON.stringify({ ...p, n: Math.min(p.n, 600) })));
    const slider = $("gridT");
    slider.max = gridSnapshots.length;
    slider.value = gridSnapshots.length;
    drawGrid();

    const trace = JSON.parse(checkpoint_trace(JSON.stringify(p)));
    drawCheckpoints(trace);
    status.textContent = `done in ${((performance.now() - started) / 1000).toFixed(2)}s`;
  } catch (e) {
    status.textContent = `error: ${e}`;
  }
}

$("run").addEventListener("click", runAll);
$("gridT").addEventListener("input", drawGrid);

await init();
runAll();
