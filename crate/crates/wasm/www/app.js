import init, { routeDemo, toyDemo, lipschitzDemo } from "./pkg/surco_wasm.js";

const COLORS = {
  "surco-zero": "#d62728",
  heuristic: "#1f77b4",
  let: "#2ca02c",
  oracle: "#9467bd",
};
const SVG = "http://www.w3.org/2000/svg";

const $ = (id) => document.getElementById(id);

function el(tag, attrs = {}, parent) {
  const node = document.createElementNS(SVG, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (parent) parent.appendChild(node);
  return node;
}

function fail(target, err) {
  target.innerHTML = `<tr><td class="error">${err.message ?? err}</td></tr>`;
}

function drawGrid(r) {
  const svg = $("grid");
  svg.innerHTML = "";
  const size = 420;
  const pad = 30;
  const step = (size - 2 * pad) / Math.max(r.rows - 1, r.cols - 1);
  const pos = (n) => [pad + (n % r.cols) * step, pad + Math.floor(n / r.cols) * step];
  const maxMu = Math.max(...r.mu);
  r.edges.forEach(([u, v], e) => {
    const [x1, y1] = pos(u);
    const [x2, y2] = pos(v);
    el("line", { x1, y1, x2, y2, stroke: "#ccc", "stroke-width": 1 + 5 * (r.mu[e] / maxMu) }, svg);
  });
  // offset each method's path slightly so overlapping routes stay visible
  r.paths.forEach((p, k) => {
    const off = (k - (r.paths.length - 1) / 2) * 3;
    for (const e of p.edges) {
      const [u, v] = r.edges[e];
      const [x1, y1] = pos(u);
      const [x2, y2] = pos(v);
      const horizontal = y1 === y2;
      el("line", {
        x1: x1 + (horizontal ? 0 : off), y1: y1 + (horizontal ? off : 0),
        x2: x2 + (horizontal ? 0 : off), y2: y2 + (horizontal ? off : 0),
        stroke: COLORS[p.method], "stroke-width": 2.5, "stroke-linecap": "round",
      }, svg);
    }
  });
  for (let n = 0; n < r.rows * r.cols; n++) {
    const [cx, cy] = pos(n);
    const endpoint = n === r.source || n === r.target;
    el("circle", { cx, cy, r: endpoint ? 7 : 4, fill: endpoint ? "#000" : "#888" }, svg);
  }
}

function drawTrace(trace) {
  const svg = $("trace");
  svg.innerHTML = "";
  if (trace.length === 0) return;
  const w = 360, h = 120, pad = 10;
  const lo = Math.min(...trace), hi = Math.max(...trace);
  const span = hi - lo || 1;
  const pts = trace.map((v, i) => {
    const x = pad + (i / Math.max(trace.length - 1, 1)) * (w - 2 * pad);
    const y = h - pad - ((v - lo) / span) * (h - 2 * pad);
    return `${x},${y}`;
  });
  el("polyline", { points: pts.join(" "), fill: "none", stroke: COLORS["surco-zero"], "stroke-width": 2 }, svg);
  const label = el("text", { x: pad, y: 14, "font-size": 11 }, svg);
  label.textContent = `${lo.toFixed(4)} .. ${hi.toFixed(4)} over ${trace.length} steps`;
}

function plan() {
  const table = $("paths");
  try {
    const r = JSON.parse(routeDemo(
      Number($("rows").value), Number($("cols").value), $("regime").value,
      BigInt($("route-seed").value), Number($("steps").value),
    ));
    drawGrid(r);
    drawTrace(r.trace);
    table.innerHTML = `<tr><th>method</th><th>P(on time)</th><th>edges</th></tr>` +
      r.paths.map((p) =>
        `<tr><td><span class="swatch" style="background:${COLORS[p.method]}"></span>${p.method}</td>` +
        `<td>${p.value.toFixed(5)}</td><td>${p.edges.length}</td></tr>`).join("") +
      `<tr><td>deadline</td><td>${r.deadline.toFixed(3)}</td><td></td></tr>`;
  } catch (err) {
    fail(table, err);
  }
}

function toy() {
  const y = Number($("y").value);
  $("y-val").textContent = y.toFixed(3);
  const table = $("toy");
  try {
    const r = JSON.parse(toyDemo(y, BigInt($("toy-seed").value)));
    const verts = [[0, 0], [0, 1], [1, 0]];
    const fmt = (v) => `(${v[0]}, ${v[1]})`;
    table.innerHTML =
      `<tr><th>vertex</th><th>f</th></tr>` +
      verts.map((v, k) => `<tr><td>${fmt(v)}</td><td>${r.vertex_values[k].toFixed(4)}</td></tr>`).join("") +
      `<tr><td>best vertex</td><td>${fmt(r.best_vertex)}</td></tr>` +
      `<tr><td>surrogate map (cos y, sin y)</td><td>${fmt(r.surrogate_vertex)}</td></tr>` +
      `<tr><td>SurCo-zero (${r.steps} steps)</td><td>${fmt(r.zero_vertex)}</td></tr>` +
      `<tr><td>learned costs</td><td>(${r.zero_costs.map((c) => c.toFixed(3)).join(", ")})</td></tr>`;
    const svg = $("triangle");
    svg.innerHTML = "";
    const at = ([a, b]) => [30 + a * 180, 210 - b * 180];
    el("polygon", { points: verts.map((v) => at(v).join(",")).join(" "), fill: "#eef", stroke: "#99a" }, svg);
    verts.forEach((v, k) => {
      const [cx, cy] = at(v);
      const best = v[0] === r.best_vertex[0] && v[1] === r.best_vertex[1];
      el("circle", { cx, cy, r: 5 + 10 * r.vertex_values[k], fill: best ? "#d62728" : "#888" }, svg);
    });
    const [sx, sy] = at(r.zero_vertex);
    el("circle", { cx: sx, cy: sy, r: 18, fill: "none", stroke: "#000", "stroke-dasharray": "3 3" }, svg);
  } catch (err) {
    fail(table, err);
  }
}

function scan() {
  const table = $("lipschitz");
  try {
    const hs = new Float64Array($("spacings").value.split(",").map((s) => Number(s.trim())));
    const r = JSON.parse(lipschitzDemo(hs));
    const row = (x) =>
      `<tr><td>${x.label}</td><td>${x.spacing}</td><td>${x.points}</td><td>${x.ratio.toFixed(6)}</td>` +
      `<td>${x.clusters}</td><td>${x.d_min === null ? "" : x.d_min.toFixed(4)}</td></tr>`;
    table.innerHTML =
      `<tr><th>map</th><th>spacing h</th><th>points</th><th>max quotient</th><th>clusters</th><th>cluster gap</th></tr>` +
      r.direct.map(row).join("") + r.surrogate.map(row).join("");
  } catch (err) {
    fail(table, err);
  }
}

await init();
$("status").textContent = "Ready.";
$("plan").addEventListener("click", plan);
$("y").addEventListener("input", toy);
$("toy-seed").addEventListener("change", toy);
$("scan").addEventListener("click", scan);
plan();
toy();
scan();
