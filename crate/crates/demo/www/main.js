import init, { star_product, wedge_convergence, theta_field } from "./pkg/formality_demo.js";

const $ = (id) => document.getElementById(id);

const presets = {
  symplectic: { dim: 2, f: "x1^2", g: "x2^2", pi: [{ indices: [0, 1], coef: "1" }] },
  so3: {
    dim: 3, f: "x1", g: "x2*x3",
    pi: [
      { indices: [0, 1], coef: "x3" },
      { indices: [1, 2], coef: "x1" },
      { indices: [2, 0], coef: "x2" },
    ],
  },
  quadratic: { dim: 2, f: "x1", g: "x2", pi: [{ indices: [0, 1], coef: "x1*x2" }] },
};

function loadPreset() {
  const p = presets[$("preset").value];
  $("dim").value = p.dim;
  $("f").value = p.f;
  $("g").value = p.g;
  $("pi").value = JSON.stringify(p.pi, null, 1);
}

function fmt(x, s) {
  const digits = s > 0 ? Math.max(1, Math.min(8, 1 - Math.floor(Math.log10(s)))) : 6;
  const v = x.toFixed(digits);
  return s > 0 ? `${v} ± ${s.toPrecision(2)}` : v;
}

function runStar() {
  const out = $("star-out");
  out.textContent = "computing…";
  setTimeout(() => {
    const t0 = performance.now();
    try {
      const r = JSON.parse(star_product(
        Number($("dim").value), $("pi").value, $("f").value, $("g").value,
        Number($("hcap").value), Number($("samples").value), BigInt($("seed").value)));
      const ms = (performance.now() - t0).toFixed(0);
      let html = "<table><tr><th>order</th><th>coefficient</th><th>monomial</th></tr>";
      for (const o of r.orders) {
        if (o.terms.length === 0) html += `<tr><td>h^${o.order}</td><td>0</td><td></td></tr>`;
        for (const t of o.terms) {
          html += `<tr><td>h^${o.order}</td><td>${fmt(t.value, t.std_error)}</td><td>${t.monomial}</td></tr>`;
        }
      }
      html += "</table>";
      html += `<p class="note">${r.weights.length} graph weights estimated in ${ms} ms`;
      if (r.skipped > 0) html += `, ${r.skipped} graphs skipped`;
      html += ".</p>";
      out.innerHTML = html;
    } catch (e) {
      out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
    }
  }, 10);
}

function runWedge() {
  const out = $("wedge-out");
  out.textContent = "sampling…";
  setTimeout(() => {
    let rows;
    try {
      rows = JSON.parse(wedge_convergence(Number($("wmax").value), BigInt($("wseed").value)));
    } catch (e) {
      out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
      return;
    }
    drawWedge(rows);
    const last = rows[rows.length - 1];
    out.innerHTML = `<p class="note">${last.samples} samples: ${fmt(last.value, last.std_error)}</p>`;
  }, 10);
}

function drawWedge(rows) {
  const c = $("wedge");
  const ctx = c.getContext("2d");
  const W = c.width, H = c.height, pad = 40;
  ctx.clearRect(0, 0, W, H);
  const lo = Math.log2(rows[0].samples), hi = Math.log2(rows[rows.length - 1].samples);
  const spread = Math.max(...rows.map((r) => Math.abs(r.value - 0.5) + 2 * r.std_error), 0.01);
  const X = (n) => pad + (W - 2 * pad) * (hi > lo ? (Math.log2(n) - lo) / (hi - lo) : 0.5);
  const Y = (v) => H / 2 - ((v - 0.5) / spread) * (H / 2 - pad);

  ctx.fillStyle = "rgba(70, 120, 200, 0.2)";
  ctx.beginPath();
  rows.forEach((r, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, X(r.samples), Y(r.value + 2 * r.std_error)));
  [...rows].reverse().forEach((r) => ctx.lineTo(X(r.samples), Y(r.value - 2 * r.std_error)));
  ctx.fill();

  ctx.strokeStyle = "#999";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(pad, Y(0.5));
  ctx.lineTo(W - pad, Y(0.5));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = "#2a5aa8";
  ctx.beginPath();
  rows.forEach((r, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, X(r.samples), Y(r.value)));
  ctx.stroke();

  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  ctx.fillText("1/2", 4, Y(0.5) + 4);
  ctx.fillText((0.5 + spread).toFixed(4), 4, pad - 4);
  ctx.fillText((0.5 - spread).toFixed(4), 4, H - pad + 14);
  for (const r of rows) ctx.fillText(String(r.samples), X(r.samples) - 14, H - 6);
}

const view = { x0: -3, x1: 3, y1: 3.6 };
let z = { x: -0.5, y: 1.2 };

function hsl(h) {
  const f = (n) => {
    const k = (n + h * 12) % 12;
    return 0.5 - 0.45 * Math.max(-1, Math.min(k - 3, 9 - k, 1));
  };
  return [f(0) * 255, f(8) * 255, f(4) * 255];
}

function drawTheta() {
  const c = $("theta");
  const ctx = c.getContext("2d");
  const W = c.width, H = c.height;
  const field = theta_field(z.x, z.y, view.x0, view.x1, view.y1, W, H);
  const img = ctx.createImageData(W, H);
  for (let i = 0; i < field.length; i++) {
    const t = field[i];
    const [r, g, b] = Number.isNaN(t) ? [0, 0, 0] : hsl(t);
    img.data.set([r, g, b, 255], 4 * i);
  }
  ctx.putImageData(img, 0, 0);
  const px = ((z.x - view.x0) / (view.x1 - view.x0)) * W;
  const py = H - (z.y / view.y1) * H;
  ctx.fillStyle = "#000";
  ctx.beginPath();
  ctx.arc(px, py, 4, 0, 2 * Math.PI);
  ctx.fill();
  $("theta-out").innerHTML = `<p class="note">z = ${z.x.toFixed(2)} + ${z.y.toFixed(2)}i</p>`;
}

function moveZ(ev) {
  const c = $("theta");
  const r = c.getBoundingClientRect();
  const u = (ev.clientX - r.left) / r.width, v = (ev.clientY - r.top) / r.height;
  z = { x: view.x0 + u * (view.x1 - view.x0), y: Math.max(0.02, (1 - v) * view.y1) };
  drawTheta();
}

await init();
$("preset").addEventListener("change", loadPreset);
$("run-star").addEventListener("click", runStar);
$("run-wedge").addEventListener("click", runWedge);
$("theta").addEventListener("click", moveZ);
loadPreset();
drawTheta();
