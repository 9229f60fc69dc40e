// Build with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { analyzeReview, fleissKappa, syntheticExperiment } from "./pkg/argfeat_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (v) => (typeof v === "number" ? v.toFixed(3) : v);

function table(headers, rows) {
  const head = `<tr>${headers.map((h) => `<th>${h}</th>`).join("")}</tr>`;
  const body = rows.map((r) => `<tr>${r.map((v) => `<td>${fmt(v)}</td>`).join("")}</tr>`).join("");
  return `<table>${head}${body}</table>`;
}

function guarded(out, f) {
  try {
    out.innerHTML = f();
  } catch (e) {
    out.innerHTML = `<p class="error">${e.message ?? e}</p>`;
  }
}

function showReview() {
  guarded($("review-out"), () => {
    const r = JSON.parse(analyzeReview($("review").value, $("merge").checked));
    const components = r.components.map((c) => [
      c.component_type, `${c.first_clause + 1}-${c.last_clause + 1}`, c.tokens, c.letters, c.position,
    ]);
    const types = r.types.map((t) => [
      t.component_type, t.count, t.tokens.total, t.tokens.mean, t.letters.mean, t.positions.mean,
    ]);
    return `<p>${r.clauses} clauses, ${r.components.length} components</p>` +
      table(["Type", "Clauses", "Tokens", "Letters", "Position"], components) +
      table(["Type", "Count", "Tokens", "Mean tokens", "Mean letters", "Mean position"], types);
  });
}

function showKappa() {
  guarded($("kappa-out"), () => {
    const k = JSON.parse(fleissKappa($("table").value));
    const value = k.kappa === null ? "undefined (one category only)" : k.kappa.toFixed(4);
    return `<p>${k.items} items, ${k.raters} raters: kappa = ${value}</p>`;
  });
}

function showExperiment() {
  $("experiment-out").textContent = "running...";
  // Let the status paint before the synchronous run blocks the page.
  setTimeout(() => guarded($("experiment-out"), () => {
    const r = JSON.parse(syntheticExperiment(Number($("signal").value), Number($("seed").value)));
    const scores = r.configurations.map((c) => [c.name, c.accuracy, c.f1, c.auc]);
    const shares = r.selected.map((s) => [s.family, s.share]);
    return `<p>${r.reviews} reviews, ${r.folds} folds</p>` +
      table(["Features", "Accuracy", "F1", "AUC"], scores) +
      (shares.length ? table(["Selected AF granularity", "Share"], shares) : "<p>no AF dimensions selected</p>");
  }), 10);
}

await init();
$("analyze").onclick = showReview;
$("kappa").onclick = showKappa;
$("run").onclick = showExperiment;
$("signal").oninput = () => ($("signal-value").textContent = $("signal").value);
showReview();
showKappa();
