import init, { analyze, construct, scan } from "./pkg/blockplan_wasm.js";

const PALETTE = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
  "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f", "#a6cee3",
  "#b2df8a", "#fb9a99"];
const SVG = "http://www.w3.org/2000/svg";
const $ = (id) => document.getElementById(id);

let selected = null;
let coloring = null;

function letter(i, n) {
  return n <= 26 ? String.fromCharCode(65 + i) : `F${i + 1}`;
}

function readEdges(n) {
  const edges = new Set();
  for (const tok of $("edges").value.split(/[\s,;]+/).filter(Boolean)) {
    const m = tok.toUpperCase().match(/^([A-Z])([A-Z])$/);
    if (!m) continue;
    const a = m[1].charCodeAt(0) - 65, b = m[2].charCodeAt(0) - 65;
    if (a !== b && a < n && b < n) edges.add(a < b ? `${a},${b}` : `${b},${a}`);
  }
  return edges;
}

function writeEdges(edges, n) {
  const list = [...edges].map((e) => e.split(",").map(Number)).sort((x, y) => x[0] - y[0] || x[1] - y[1]);
  $("edges").value = list.map(([a, b]) => letter(a, n) + letter(b, n)).join(" ");
}

function position(i, n) {
  const t = (2 * Math.PI * i) / n - Math.PI / 2;
  return [170 * Math.cos(t), 170 * Math.sin(t)];
}

function draw() {
  const n = +$("n").value;
  const edges = readEdges(n);
  const svg = $("graph");
  svg.replaceChildren();
  for (const e of edges) {
    const [a, b] = e.split(",").map(Number);
    const [x1, y1] = position(a, n), [x2, y2] = position(b, n);
    const line = document.createElementNS(SVG, "line");
    Object.entries({ x1, y1, x2, y2, stroke: "#555", "stroke-width": 2 }).forEach(([k, v]) => line.setAttribute(k, v));
    svg.append(line);
  }
  for (let i = 0; i < n; i++) {
    const [cx, cy] = position(i, n);
    const c = document.createElementNS(SVG, "circle");
    const fill = coloring ? PALETTE[coloring[i] % PALETTE.length] : "#eee";
    Object.entries({ cx, cy, r: 20, fill, stroke: i === selected ? "#d00" : "#333", "stroke-width": i === selected ? 4 : 1.5 })
      .forEach(([k, v]) => c.setAttribute(k, v));
    c.addEventListener("click", () => toggle(i));
    const t = document.createElementNS(SVG, "text");
    Object.entries({ x: cx, y: cy + 5, "text-anchor": "middle" }).forEach(([k, v]) => t.setAttribute(k, v));
    t.textContent = letter(i, n);
    svg.append(c, t);
  }
}

function toggle(i) {
  const n = +$("n").value;
  if (selected === null) {
    selected = i;
  } else if (selected === i) {
    selected = null;
  } else {
    const edges = readEdges(n);
    const key = selected < i ? `${selected},${i}` : `${i},${selected}`;
    edges.has(key) ? edges.delete(key) : edges.add(key);
    writeEdges(edges, n);
    selected = null;
    refresh();
    return;
  }
  draw();
}

function refresh() {
  const n = +$("n").value, q = +$("q").value;
  try {
    const a = JSON.parse(analyze(n, q, $("edges").value));
    coloring = a.profiles.length ? a.profiles[0].coloring : null;
    const lines = [
      `chromatic number ${a.chromatic_number}: ${a.feasible ? "feasible" : "infeasible"} for blocks of ${1 << q}`,
      `phi_max ${a.phi_max}`,
      "profile sets:",
      ...a.profiles.map((p) => `  ${p.profile}  ${p.estimable} interactions`),
    ];
    $("analysis").textContent = lines.join("\n");
    $("analysis").className = "";
  } catch (e) {
    coloring = null;
    $("analysis").textContent = String(e);
    $("analysis").className = "error";
  }
  draw();
}

function showDesign() {
  const n = +$("n").value, q = +$("q").value, p = +$("p").value;
  const out = $("design");
  try {
    const r = JSON.parse(construct(n, p, q, $("edges").value, "", $("objective").value));
    if (r.status === "infeasible") {
      const fixes = r.single_edge_fixes ? `; dropping any one of ${r.single_edge_fixes.join(", ")} helps` : "";
      out.innerHTML = `<p class="error">${r.reason}${fixes}</p>`;
      return;
    }
    const groups = r.grouping.map((g) => `(${g.join(",")})`).join(" ");
    const lost = r.inestimable_required.map((x) => x.interaction).join(", ");
    const words = r.design.defining_words.join(" ") || "none";
    let html = `<p>${r.status}: grouping ${groups}, defining words ${words}, ` +
      `${r.estimable_count} interactions estimable${lost ? `; lost: ${lost}` : ""}</p><table>`;
    r.design.blocks.forEach((b, i) => {
      html += `<tr><td>block ${i + 1}</td>${b.map((run) => `<td>${run}</td>`).join("")}</tr>`;
    });
    out.innerHTML = html + "</table>";
  } catch (e) {
    out.innerHTML = `<p class="error">${e}</p>`;
  }
}

function runScan() {
  const n = +$("n").value, q = +$("q").value;
  try {
    const rows = JSON.parse(scan(n, $("words").value, q));
    $("scanned").textContent = rows.map((r) => `${r.profile}  ${r.grouping}`).join("\n") || "no profile sets";
    $("scanned").className = "";
  } catch (e) {
    $("scanned").textContent = String(e);
    $("scanned").className = "error";
  }
}

await init();
for (const id of ["n", "q", "edges"]) $(id).addEventListener("change", () => { selected = null; refresh(); });
$("construct").addEventListener("click", showDesign);
$("scan").addEventListener("click", runScan);
refresh();
