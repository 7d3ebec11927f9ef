import init, { fringeScan, dualityReport, sweep } from "./pkg/ramsey_duality_web.js";

const $ = (id) => document.getElementById(id);

const COLORS = { P2: "#1f77b4", Q2: "#2ca02c", D2: "#d62728", V2: "#9467bd" };

function stateSpec() {
  const kind = $("kind").value;
  const x = Math.max(0, Number($("nbar").value) || 0);
  return kind === "fock" ? `fock:${Math.round(x)}` : `${kind}:${x}`;
}

function showError(err) {
  const box = $("error");
  if (err) {
    box.textContent = String(err.message ?? err);
    box.hidden = false;
  } else {
    box.hidden = true;
  }
}

// Axes box plus a polyline per series; xs shared, each series may hold nulls.
function plot(canvas, xs, series, { xLabel, yMin = 0, yMax = 1, xTicks }) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  const m = { l: 48, r: 12, t: 12, b: 36 };
  ctx.clearRect(0, 0, w, h);
  const x0 = xs[0], x1 = xs[xs.length - 1] || 1;
  const px = (x) => m.l + ((x - x0) / (x1 - x0 || 1)) * (w - m.l - m.r);
  const py = (y) => h - m.b - ((y - yMin) / (yMax - yMin)) * (h - m.t - m.b);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui, sans-serif";
  ctx.strokeRect(m.l, m.t, w - m.l - m.r, h - m.t - m.b);
  for (let k = 0; k <= 4; k++) {
    const y = yMin + (k / 4) * (yMax - yMin);
    ctx.fillText(y.toFixed(2), 8, py(y) + 4);
  }
  for (const [x, label] of xTicks ?? [[x0, String(x0)], [x1, String(x1)]]) {
    ctx.fillText(label, px(x) - 8, h - m.b + 16);
  }
  ctx.fillText(xLabel, w / 2, h - 4);

  let ly = m.t + 14;
  for (const { name, ys, color } of series) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    let pen = false;
    ys.forEach((y, i) => {
      if (y === null || !Number.isFinite(y)) { pen = false; return; }
      if (pen) ctx.lineTo(px(xs[i]), py(y)); else ctx.moveTo(px(xs[i]), py(y));
      pen = true;
    });
    ctx.stroke();
    if (series.length > 1) {
      ctx.fillStyle = color;
      ctx.fillText(name, w - m.r - 60, ly);
      ly += 16;
    }
  }
}

function updateSingle() {
  const theta = Number($("theta").value) * Math.PI;
  const lambda = Number($("lambda").value);
  $("theta-out").textContent = Number($("theta").value).toFixed(3);
  $("lambda-out").textContent = lambda.toFixed(2);
  try {
    const spec = stateSpec();
    const scan = JSON.parse(fringeScan(spec, theta, lambda, 721));
    plot($("fringe"), scan.phi_values, [{ name: "p_a", ys: scan.p_a, color: "#1f77b4" }], {
      xLabel: "φ",
      xTicks: [[0, "0"], [Math.PI, "π"], [2 * Math.PI, "2π"]],
    });
    const vis = scan.extracted_visibility;
    $("fringe-caption").textContent = vis < 1e-9
      ? "flat fringe: no visibility"
      : `extracted visibility ${vis.toFixed(6)}, maximum at φ = ${scan.extracted_phase.toFixed(4)}`;

    const r = JSON.parse(dualityReport(spec, theta, lambda));
    const rows = [
      ["w₊", r.w_plus], ["w₋", r.w_minus], ["P", r.P], ["Q", r.Q], ["D", r.D],
      ["V", r.V], ["V (branch overlap)", r.V_internal],
      ["(1−P²)Q² + P² + V²", r.lhs_eq2],
    ];
    $("report").tBodies[0].innerHTML = rows
      .map(([k, v]) => `<tr><td>${k}</td><td>${v.toFixed(10)}</td></tr>`)
      .join("");
    showError(null);
  } catch (e) {
    showError(e);
  }
}

function runSweep(ev) {
  ev?.preventDefault();
  try {
    const rows = JSON.parse(sweep($("regime").value, $("grid").value, Number($("lambda").value)));
    const xs = rows.map((r) => r.nbar);
    const series = ["P2", "Q2", "D2", "V2"].map((k) => ({
      name: k.replace("2", "²"),
      ys: rows.map((r) => r[k]),
      color: COLORS[k],
    }));
    plot($("sweep"), xs, series, { xLabel: "n̄" });
    const failed = rows.filter((r) => r.error).length;
    $("sweep-caption").textContent =
      `${rows.length} intensities, λ = ${Number($("lambda").value).toFixed(2)}` +
      (failed ? `, ${failed} failed to calibrate` : "");
    showError(null);
  } catch (e) {
    showError(e);
  }
}

await init();
for (const id of ["kind", "nbar", "theta", "lambda"]) {
  $(id).addEventListener("input", updateSingle);
}
$("sweep-form").addEventListener("submit", runSweep);
updateSingle();
runSweep();
