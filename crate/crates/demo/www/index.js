import init, { weightTable, scoreProfile, learningCurve } from "./pkg/tfcr_demo.js";

const COLORS = { none: "#888888", tfidf: "#1f77b4", kld: "#2ca02c", tfcr: "#d62728" };
const NAMES = { none: "unweighted", tfidf: "TF-IDF", kld: "KLD", tfcr: "TF-CR" };

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function legend(el, keys) {
  el.innerHTML = keys
    .map((k) => `<span><i style="background:${COLORS[k]}"></i>${NAMES[k]}</span>`)
    .join("");
}

// Draws named series of [x, y] points with linear axes.
function plot(canvas, series, { xLabel, yLabel, yMin, yMax }) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const pad = { l: 60, r: 20, t: 15, b: 40 };
  ctx.clearRect(0, 0, W, H);

  const all = Object.values(series).flat();
  if (all.length === 0) return;
  const xs = all.map((p) => p[0]);
  const ys = all.map((p) => p[1]);
  const x0 = Math.min(...xs), x1 = Math.max(...xs) || 1;
  const y0 = yMin ?? Math.min(0, ...ys);
  const y1 = yMax ?? (Math.max(...ys) || 1);
  const sx = (x) => pad.l + ((x - x0) / (x1 - x0 || 1)) * (W - pad.l - pad.r);
  const sy = (y) => H - pad.b - ((y - y0) / (y1 - y0 || 1)) * (H - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui, sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t);
  ctx.lineTo(pad.l, H - pad.b);
  ctx.lineTo(W - pad.r, H - pad.b);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(y.toPrecision(3), 5, sy(y) + 4);
    const x = x0 + ((x1 - x0) * i) / 4;
    ctx.fillText(Number.isInteger(x) ? String(x) : x.toPrecision(3), sx(x) - 10, H - pad.b + 15);
  }
  ctx.fillText(xLabel, W / 2 - 30, H - 5);
  ctx.save();
  ctx.translate(12, H / 2 + 30);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, 0, 0);
  ctx.restore();

  for (const [key, points] of Object.entries(series)) {
    ctx.strokeStyle = COLORS[key];
    ctx.fillStyle = COLORS[key];
    ctx.lineWidth = 2;
    ctx.beginPath();
    points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
    if (points.length < 30) {
      for (const [x, y] of points) {
        ctx.beginPath();
        ctx.arc(sx(x), sy(y), 3, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
  }
  ctx.lineWidth = 1;
}

function guarded(errorEl, fn) {
  return () => {
    errorEl.textContent = "";
    try {
      fn();
    } catch (e) {
      errorEl.textContent = e.message ?? String(e);
    }
  };
}

function renderWeights() {
  const view = JSON.parse(weightTable($("corpus").value, $("scheme").value, 1e-10));
  const head = `<tr><th>word</th><th>count</th>${view.labels.map((l) => `<th>${l}</th>`).join("")}</tr>`;
  const body = view.rows
    .slice(0, 40)
    .map((r) => {
      const peak = Math.max(...r.scores);
      const cells = r.scores
        .map((s) => {
          const shade = peak > 0 ? Math.round(255 - (s / peak) * 90) : 255;
          return `<td style="background:rgb(255,${shade},${shade})">${s.toFixed(4)}</td>`;
        })
        .join("");
      return `<tr><td>${r.word}</td><td>${r.total}</td>${cells}</tr>`;
    })
    .join("");
  const more = view.rows.length > 40 ? `<p>${view.rows.length - 40} more words not shown.</p>` : "";
  $("weights-out").innerHTML = `<table>${head}${body}</table>${more}`;
}

function renderProfile() {
  const params = {
    category_tokens: num("p-nc"),
    word_total: num("p-w"),
    other_tokens: num("p-other"),
    k: num("p-k"),
  };
  const points = JSON.parse(scoreProfile(JSON.stringify(params)));
  // Each scheme is scaled to its own maximum so the shapes can be compared.
  const series = {};
  for (const key of ["tfidf", "kld", "tfcr"]) {
    const peak = Math.max(...points.map((p) => p[key])) || 1;
    series[key] = points.map((p) => [p.word_in_category, p[key] / peak]);
  }
  plot($("profile"), series, {
    xLabel: "occurrences in the focus category",
    yLabel: "score / max",
    yMin: 0,
    yMax: 1,
  });
}

function renderCurve() {
  const nDocs = num("c-docs");
  const nFolds = 3;
  // Largest training set that still fits in every fold's training pool.
  const pool = Math.floor((nDocs * (nFolds - 1)) / nFolds * 0.9);
  const sizes = [...new Set([0.1, 0.25, 0.5, 1].map((f) => Math.max(2, Math.floor(pool * f))))];
  const params = {
    data: {
      n_docs: nDocs,
      n_categories: num("c-k"),
      vocab_per_category: 40,
      shared_vocab: 60,
      shared_rate: num("c-shared"),
      dim: num("c-dim"),
      seed: num("c-seed"),
    },
    sizes,
    n_folds: nFolds,
    schemes: ["none", "tfidf", "kld", "tfcr"],
    seed: num("c-seed"),
    max_epochs: 100,
  };
  const view = JSON.parse(learningCurve(JSON.stringify(params)));
  const series = {};
  for (const a of view.aggregates) {
    (series[a.scheme] ??= []).push([a.train_size, a.mean]);
  }
  plot($("curve"), series, { xLabel: "training documents", yLabel: "macro-F1", yMax: 1 });
  if (view.failures.length) {
    $("curve-error").textContent = view.failures.join("\n");
  }
}

await init();
legend($("profile-legend"), ["tfidf", "kld", "tfcr"]);
legend($("curve-legend"), ["none", "tfidf", "kld", "tfcr"]);

const weights = guarded($("weights-error"), renderWeights);
const profile = guarded($("profile-error"), renderProfile);
const curve = guarded($("curve-error"), renderCurve);

$("weights-run").addEventListener("click", weights);
$("scheme").addEventListener("change", weights);
for (const id of ["p-nc", "p-w", "p-other", "p-k"]) $(id).addEventListener("input", profile);
$("curve-run").addEventListener("click", () => {
  $("curve-run").disabled = true;
  // Let the button repaint before the synchronous run blocks the page.
  setTimeout(() => {
    curve();
    $("curve-run").disabled = false;
  }, 20);
});

weights();
profile();
curve();
