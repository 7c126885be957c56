import init, { laser_scan, power_broadening, anticrossing } from "./pkg/cqed_wasm.js";

const LAMBDA_CAVITY_NM = 931.2;

function values(section) {
  const v = {};
  for (const el of section.querySelectorAll("input, select")) {
    v[el.name] = el.type === "range" ? parseFloat(el.value) : el.value;
    const out = el.parentElement.querySelector("label output");
    if (out) out.textContent = el.value;
  }
  return v;
}

function plot(canvas, x, series, xlabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const ys = series.flatMap((s) => s.y).filter(Number.isFinite);
  const x0 = Math.min(...x), x1 = Math.max(...x);
  let y0 = Math.min(...ys), y1 = Math.max(...ys);
  if (y1 === y0) { y0 -= 1; y1 += 1; }
  const px = (v) => pad + ((v - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (v) => h - pad - ((v - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - pad + 14);
  ctx.fillText(xlabel, w / 2 - 30, h - 8);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(px(x[i]), py(v)) : ctx.moveTo(px(x[i]), py(v))));
    ctx.stroke();
  }
}

function guarded(fn) {
  return () => {
    const err = document.getElementById("error");
    try {
      fn();
      err.textContent = "";
    } catch (e) {
      err.textContent = String(e.message ?? e);
    }
  };
}

const views = {
  scan(section) {
    const v = values(section);
    const c = laser_scan(v.g, v.kappa, v.gamma, v.gammaD, LAMBDA_CAVITY_NM, LAMBDA_CAVITY_NM + v.offset,
      v.target === "cavity", v.observe === "cavity", v.rabi, 201);
    plot(section.querySelector("canvas"), c.x, [{ y: c.y, color: "#1f5fbf" }], "laser offset (GHz)");
    const wd = c.width_ghz;
    section.querySelector(".result").textContent = Number.isFinite(wd) ? `${wd.toFixed(3)} GHz` : "no fit";
  },
  broadening(section) {
    const v = values(section);
    const c = power_broadening(v.dc, v.d0, v.alpha, v.pmax, 301);
    plot(section.querySelector("canvas"), c.x,
      [{ y: c.y, color: "#1f5fbf" }, { y: c.y2, color: "#bf5f1f" }], "power (µW)");
  },
  anticrossing(section) {
    const v = values(section);
    const span = Math.max(4 * v.g, 10);
    const c = anticrossing(v.g, v.kappa, v.gamma, span, 301);
    plot(section.querySelector("canvas"), c.x,
      [{ y: c.y, color: "#1f5fbf" }, { y: c.y2, color: "#bf5f1f" }], "dot detuning (GHz)");
    section.querySelector(".result").textContent = `${c.width_ghz.toFixed(3)} GHz`;
  },
};

await init();
for (const [id, render] of Object.entries(views)) {
  const section = document.getElementById(id);
  const update = guarded(() => render(section));
  section.addEventListener("input", update);
  update();
}
