#include "sketchnmf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sketchnmf/errors.hpp"
#include "sketchnmf/eval.hpp"
#include "sketchnmf/io.hpp"
#include "sketchnmf/rng.hpp"

namespace sketchnmf::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "sketchnmf 1.0";

// ---- config parsing -------------------------------------------------------

void allow_only(const json& obj, std::initializer_list<std::string_view> keys,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown field '" + key + "' in " + where);
    }
  }
}

bool present(const json& obj, const char* key) {
  return obj.contains(key) && !obj.at(key).is_null();
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!present(obj, key)) throw ConfigError("missing field '" + std::string(key) + "' in " + where);
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  } else {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(where + "." + key + " must be a nonnegative integer");
    }
  }
  return v.get<T>();
}

template <class T>
std::optional<T> get_opt(const json& obj, const char* key, const std::string& where) {
  if (!present(obj, key)) return std::nullopt;
  return get<T>(obj, key, where);
}

template <class T>
std::vector<T> get_list(const json& obj, const char* key, const std::string& where) {
  std::vector<T> out;
  if (!present(obj, key)) return out;
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw ConfigError(where + "." + key + " must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    json wrapper = {{"v", arr[i]}};
    out.push_back(get<T>(wrapper, "v", where + "." + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ProblemShape parse_problem(const std::string& s) {
  if (s == "one_sided_orthogonal") return ProblemShape::one_sided_orthogonal;
  if (s == "one_sided_ridge") return ProblemShape::one_sided_ridge;
  if (s == "two_sided") return ProblemShape::two_sided;
  throw ConfigError("unknown problem '" + s + "'");
}

template <class F>
auto wrap_config(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// ---- shared pipeline pieces ----------------------------------------------

using Record = std::variant<std::shared_ptr<const CompressedOneSided>,
                            std::shared_ptr<const CompressedTwoSided>>;

fs::path subdir(const ExperimentConfig& cfg, const char* name) { return cfg.output_dir / name; }

DenseMatrix obtain_x(const ExperimentConfig& cfg) {
  if (const auto* file = std::get_if<FileSource>(&cfg.data)) {
    return load_matrix(file->path, file->format);
  }
  const fs::path path = data_path(cfg);
  if (fs::exists(path)) return load_matrix(path, MatrixFormat::csv_dense);
  cmd_generate(cfg);
  return load_matrix(path, MatrixFormat::csv_dense);
}

SketchOperator make_operator(const ExperimentConfig& cfg, const DenseMatrix& x, Side side) {
  const std::size_t dim = side == Side::left ? x.rows() : x.cols();
  const auto& s = cfg.sketch;
  switch (s.kind) {
    case SketchKind::gaussian_iid: return sample_gaussian_sketch(s.k, dim, s.seed, s.variance, side);
    case SketchKind::orthonormal_rows: return sample_orthonormal_sketch(s.k, dim, s.seed, side);
    case SketchKind::rangefinder: return rangefinder_sketch(x, s.k, s.seed, side);
  }
  throw ConfigError("unknown sketch kind");
}

Record compress(const ExperimentConfig& cfg, const DenseMatrix& x) {
  if (cfg.sketch.k > std::min(x.rows(), x.cols()) && cfg.sketch.kind != SketchKind::gaussian_iid) {
    throw ConfigError("sketch.k exceeds the data dimensions");
  }
  if (cfg.sketch.two_sided) {
    return std::make_shared<const CompressedTwoSided>(compress_two_sided(
        x, make_operator(cfg, x, Side::left), make_operator(cfg, x, Side::right)));
  }
  return std::make_shared<const CompressedOneSided>(
      compress_one_sided(x, make_operator(cfg, x, Side::left)));
}

Record load_record(const fs::path& dir) {
  const std::string shape = record_shape(dir);
  if (shape == "two_sided") return std::make_shared<const CompressedTwoSided>(load_two_sided(dir));
  return std::make_shared<const CompressedOneSided>(load_one_sided(dir));
}

struct Built {
  SketchedMUProblem problem;
  RegularizationParams params;
  bool certified = false;
};

Built build(const ExperimentConfig& cfg, const Record& record) {
  const auto& ps = cfg.params;
  const bool gram_rule = ps.sigma_convention == ShiftConvention::gram;
  Built b;
  if (cfg.problem == ProblemShape::two_sided) {
    const auto* c2 = std::get_if<std::shared_ptr<const CompressedTwoSided>>(&record);
    if (!c2) throw ConfigError("two_sided problem needs a two-sided record");
    const auto& c = **c2;
    b.params.lambda1 = ps.lambda1.value_or(ps.lambda.value_or(0.0));
    b.params.lambda2 = ps.lambda2.value_or(ps.lambda.value_or(0.0));
    b.params.sigma1 = ps.sigma1 ? ps.sigma1
                      : gram_rule ? shift_sigma_regularized(c.a1, b.params.lambda1, c.q1).value
                                  : shift_sigma(c.a1, ShiftConvention::sketch_rows).value;
    b.params.sigma2 = ps.sigma2 ? ps.sigma2
                      : gram_rule ? shift_sigma_regularized(c.a2, b.params.lambda2, c.q2).value
                                  : shift_sigma(c.a2, ShiftConvention::sketch_rows).value;
    b.problem = build_problem_two_sided(*c2, cfg.rank, b.params, gram_rule);
  } else {
    const auto* c1 = std::get_if<std::shared_ptr<const CompressedOneSided>>(&record);
    if (!c1) throw ConfigError("one-sided problem needs a one-sided record");
    b.params.lambda = ps.lambda.value_or(0.1);
    b.params.sigma = ps.sigma ? ps.sigma : std::optional(shift_sigma((*c1)->a, ps.sigma_convention).value);
    b.problem = cfg.problem == ProblemShape::one_sided_orthogonal
                    ? build_problem_one_sided_orthogonal(*c1, cfg.rank, b.params.lambda,
                                                         b.params.sigma, gram_rule)
                    : build_problem_one_sided_ridge(*c1, cfg.rank, b.params.lambda,
                                                    b.params.sigma, gram_rule);
  }
  b.certified = b.problem.validity.certified();
  return b;
}

double init_scale(const Record& record, std::size_t r) {
  const auto [sums, m] = std::visit(
      [](const auto& c) { return std::pair<const Vector*, std::size_t>{&c->row_sums, c->m}; },
      record);
  double total = 0.0;
  for (double v : sums->data()) total += v;
  const double mean = total / static_cast<double>(sums->size());
  const double scale = std::sqrt(mean / static_cast<double>(m * r));
  return scale > 0.0 ? scale : 1.0;
}

std::pair<std::size_t, std::size_t> record_dims(const Record& record) {
  return std::visit([](const auto& c) { return std::pair{c->m, c->n}; }, record);
}

json params_json(const ExperimentConfig& cfg, const RegularizationParams& p) {
  if (cfg.problem == ProblemShape::two_sided) {
    return {{"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"sigma1", *p.sigma1}, {"sigma2", *p.sigma2}};
  }
  return {{"lambda", p.lambda}, {"sigma", *p.sigma}};
}

json solver_json(const ExperimentConfig& cfg) {
  const SolverConfig& s = cfg.solver;
  json j = {{"method", to_string(cfg.method)}, {"rank", cfg.rank},
            {"max_iters", s.max_iters},        {"rel_tol", s.rel_tol},
            {"window", s.window},              {"step_alpha", s.step_alpha},
            {"denom_guard", s.denom_guard},    {"seed", s.seed},
            {"log_every", s.log_every}};
  j["target_objective"] = s.target_objective ? json(*s.target_objective) : json(nullptr);
  return j;
}

MetricsReport metrics_for(const ExperimentConfig& cfg, const DenseMatrix& x, const FactorPair& f,
                          const Built& b, const Record& record) {
  MetricsReport rep;
  rep.relative_error = relative_error(x, f);
  rep.cosine_similarity = cosine_similarity(x, f);
  rep.objective_terms = problem_objective(b.problem, f).terms;
  if (const auto* c1 = std::get_if<std::shared_ptr<const CompressedOneSided>>(&record)) {
    rep.residual_projection = residual_projection_norm(x, (*c1)->a);
  }
  if (cfg.problem == ProblemShape::one_sided_ridge) {
    rep.rescaled_relative_error = rescaled_relative_error(x, f, b.params.lambda);
  }
  return rep;
}

void write_trace(const fs::path& path, const SolveResult& res) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "iter,objective";
  for (const auto& name : res.term_names) out << ",term:" << name;
  out << ",wall_ms\n";
  for (const auto& pt : res.trace) {
    out << pt.iter << ',' << io::format_double(pt.objective);
    for (double t : pt.terms) out << ',' << io::format_double(t);
    out << ',' << io::format_double(pt.wall_ms) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string_view to_string(ProblemShape p) noexcept {
  switch (p) {
    case ProblemShape::one_sided_orthogonal: return "one_sided_orthogonal";
    case ProblemShape::one_sided_ridge: return "one_sided_ridge";
    case ProblemShape::two_sided: return "two_sided";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& doc) {
  return wrap_config([&] {
    ExperimentConfig cfg;
    cfg.source = doc;
    allow_only(doc, {"data", "sketch", "problem", "params", "solver", "eval", "output_dir", "bench"},
               "config");

    const json& data = doc.contains("data") ? doc.at("data") : throw ConfigError("missing field 'data'");
    allow_only(data, {"synthetic", "file"}, "data");
    if (present(data, "synthetic") == present(data, "file")) {
      throw ConfigError("data needs exactly one of 'synthetic' or 'file'");
    }
    if (present(data, "synthetic")) {
      const json& s = data.at("synthetic");
      allow_only(s, {"m", "n", "r", "seed", "distribution"}, "data.synthetic");
      SyntheticSpec spec;
      spec.m = get<std::size_t>(s, "m", "data.synthetic");
      spec.n = get<std::size_t>(s, "n", "data.synthetic");
      spec.r = get<std::size_t>(s, "r", "data.synthetic");
      spec.seed = get_opt<std::uint64_t>(s, "seed", "data.synthetic").value_or(0);
      const auto dist = get_opt<std::string>(s, "distribution", "data.synthetic");
      if (dist && *dist != "standard_lognormal") throw ConfigError("unknown distribution '" + *dist + "'");
      if (spec.m == 0 || spec.n == 0 || spec.r == 0 || spec.r > std::min(spec.m, spec.n)) {
        throw ConfigError("data.synthetic needs 1 <= r <= min(m, n)");
      }
      cfg.data = spec;
    } else {
      const json& f = data.at("file");
      allow_only(f, {"path", "format"}, "data.file");
      FileSource src;
      src.path = get<std::string>(f, "path", "data.file");
      src.format = parse_matrix_format(
          get_opt<std::string>(f, "format", "data.file").value_or("csv_dense"));
      cfg.data = src;
    }

    cfg.problem = parse_problem(get<std::string>(doc, "problem", "config"));

    const json& sk = doc.contains("sketch") ? doc.at("sketch") : throw ConfigError("missing field 'sketch'");
    allow_only(sk, {"kind", "sides", "k", "seed", "variance"}, "sketch");
    cfg.sketch.kind = parse_sketch_kind(get<std::string>(sk, "kind", "sketch"));
    cfg.sketch.k = get<std::size_t>(sk, "k", "sketch");
    if (cfg.sketch.k == 0) throw ConfigError("sketch.k must be positive");
    cfg.sketch.seed = get_opt<std::uint64_t>(sk, "seed", "sketch").value_or(0);
    cfg.sketch.variance = get_opt<double>(sk, "variance", "sketch");
    if (cfg.sketch.variance && !(*cfg.sketch.variance > 0.0)) {
      throw ConfigError("sketch.variance must be positive");
    }
    const std::string sides = get_opt<std::string>(sk, "sides", "sketch")
                                  .value_or(cfg.problem == ProblemShape::two_sided ? "both" : "left");
    if (sides != "left" && sides != "both") throw ConfigError("sketch.sides must be 'left' or 'both'");
    cfg.sketch.two_sided = sides == "both";
    if ((cfg.problem == ProblemShape::two_sided) != cfg.sketch.two_sided) {
      throw ConfigError("two_sided problems need sides 'both'; one-sided problems need 'left'");
    }
    if (cfg.problem == ProblemShape::one_sided_orthogonal &&
        cfg.sketch.kind == SketchKind::gaussian_iid) {
      throw ConfigError("one_sided_orthogonal needs an orthonormal_rows or rangefinder sketch");
    }

    if (present(doc, "params")) {
      const json& p = doc.at("params");
      allow_only(p, {"lambda", "lambda1", "lambda2", "sigma", "sigma1", "sigma2", "sigma_convention"},
                 "params");
      auto& ps = cfg.params;
      ps.lambda = get_opt<double>(p, "lambda", "params");
      ps.lambda1 = get_opt<double>(p, "lambda1", "params");
      ps.lambda2 = get_opt<double>(p, "lambda2", "params");
      ps.sigma = get_opt<double>(p, "sigma", "params");
      ps.sigma1 = get_opt<double>(p, "sigma1", "params");
      ps.sigma2 = get_opt<double>(p, "sigma2", "params");
      const auto conv = get_opt<std::string>(p, "sigma_convention", "params").value_or("gram");
      if (conv == "gram") {
        ps.sigma_convention = ShiftConvention::gram;
      } else if (conv == "sketch_rows") {
        ps.sigma_convention = ShiftConvention::sketch_rows;
      } else {
        throw ConfigError("params.sigma_convention must be 'gram' or 'sketch_rows'");
      }
      for (const auto* v : {&ps.lambda, &ps.lambda1, &ps.lambda2, &ps.sigma, &ps.sigma1, &ps.sigma2}) {
        if (*v && !(**v >= 0.0)) throw ConfigError("params entries must be nonnegative");
      }
    }

    const json& so = doc.contains("solver") ? doc.at("solver") : throw ConfigError("missing field 'solver'");
    allow_only(so, {"method", "rank", "max_iters", "rel_tol", "window", "target_objective",
                    "step_alpha", "denom_guard", "seed"},
               "solver");
    cfg.method = parse_method(get_opt<std::string>(so, "method", "solver").value_or("mu"));
    cfg.rank = get<std::size_t>(so, "rank", "solver");
    if (cfg.rank == 0) throw ConfigError("solver.rank must be positive");
    auto& sc = cfg.solver;
    sc.max_iters = get_opt<std::size_t>(so, "max_iters", "solver").value_or(sc.max_iters);
    sc.rel_tol = get_opt<double>(so, "rel_tol", "solver").value_or(sc.rel_tol);
    sc.window = get_opt<std::size_t>(so, "window", "solver").value_or(sc.window);
    sc.target_objective = get_opt<double>(so, "target_objective", "solver");
    sc.step_alpha = get_opt<double>(so, "step_alpha", "solver").value_or(sc.step_alpha);
    sc.denom_guard = get_opt<double>(so, "denom_guard", "solver").value_or(sc.denom_guard);
    sc.seed = get_opt<std::uint64_t>(so, "seed", "solver").value_or(0);
    if (sc.max_iters < 1) throw ConfigError("solver.max_iters must be at least 1");
    if (sc.rel_tol < 0.0) throw ConfigError("solver.rel_tol must be nonnegative");
    if (!(sc.denom_guard > 0.0)) throw ConfigError("solver.denom_guard must be positive");
    if (!(sc.step_alpha > 0.0)) throw ConfigError("solver.step_alpha must be positive");

    if (present(doc, "eval")) {
      const json& ev = doc.at("eval");
      allow_only(ev, {"with_full_eval", "log_every"}, "eval");
      cfg.with_full_eval = get_opt<bool>(ev, "with_full_eval", "eval").value_or(false);
      sc.log_every = get_opt<std::size_t>(ev, "log_every", "eval").value_or(0);
    }

    if (present(doc, "output_dir")) cfg.output_dir = get<std::string>(doc, "output_dir", "config");

    if (present(doc, "bench")) {
      const json& b = doc.at("bench");
      allow_only(b, {"k_grid", "lambda_grid", "seeds"}, "bench");
      cfg.bench.k_grid = get_list<std::size_t>(b, "k_grid", "bench");
      cfg.bench.lambda_grid = get_list<double>(b, "lambda_grid", "bench");
      cfg.bench.seeds = get_list<std::uint64_t>(b, "seeds", "bench");
    }
    return cfg;
  });
}

ExperimentConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = io::read_json(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(doc);
}

fs::path data_path(const ExperimentConfig& cfg) {
  if (const auto* file = std::get_if<FileSource>(&cfg.data)) return file->path;
  return cfg.output_dir / "data" / "X.csv";
}

void cmd_generate(const ExperimentConfig& cfg) {
  const fs::path dir = subdir(cfg, "data");
  json manifest = {{"rng", kRngName}, {"version", kVersion}, {"config", cfg.source}};
  if (const auto* spec = std::get_if<SyntheticSpec>(&cfg.data)) {
    const SyntheticData d = synthetic_lognormal(*spec);
    save_matrix(dir / "X.csv", d.x, MatrixFormat::csv_dense);
    io::write_matrix_csv(dir / "U_true.csv", d.truth.u);
    io::write_matrix_csv(dir / "V_true.csv", d.truth.v);
    manifest.update({{"m", spec->m}, {"n", spec->n}, {"r", spec->r}, {"seed", spec->seed},
                     {"distribution", "standard_lognormal"}, {"path", (dir / "X.csv").string()}});
  } else {
    const DenseMatrix x = obtain_x(cfg);
    save_matrix(dir / "X.csv", x, MatrixFormat::csv_dense);
    manifest.update({{"m", x.rows()}, {"n", x.cols()},
                     {"source", std::get<FileSource>(cfg.data).path.string()}});
  }
  io::write_json(dir / "manifest.json", manifest);
}

void cmd_compress(const ExperimentConfig& cfg) {
  const DenseMatrix x = obtain_x(cfg);
  const Record record = compress(cfg, x);
  const fs::path dir = subdir(cfg, "compressed");
  std::visit([&](const auto& c) { save_record(dir, *c); }, record);
  json manifest = io::read_json(dir / "manifest.json");
  manifest["version"] = kVersion;
  manifest["config"] = cfg.source;
  io::write_json(dir / "manifest.json", manifest);
}

StopReason cmd_factorize(const ExperimentConfig& cfg) {
  const Record record = load_record(subdir(cfg, "compressed"));
  const Built b = build(cfg, record);
  const auto [m, n] = record_dims(record);
  const double scale = init_scale(record, cfg.rank);
  FactorPair f0 = init_factors(m, n, cfg.rank, cfg.solver.seed, scale);
  if (cfg.method == Method::mu && !b.certified) {
    throw UncertifiedProblem("sigma below the certified minimum; use pgd or a larger sigma");
  }
  const SolveResult res = solve(b.problem, std::move(f0), cfg.solver, cfg.method);

  const fs::path dir = subdir(cfg, "factorize");
  io::write_matrix_csv(dir / "U.csv", res.factors.u);
  io::write_matrix_csv(dir / "V.csv", res.factors.v);
  write_trace(dir / "trace.csv", res);
  json manifest = {{"version", kVersion},
                   {"rng", kRngName},
                   {"problem", to_string(cfg.problem)},
                   {"params", params_json(cfg, b.params)},
                   {"certified", b.certified},
                   {"solver", solver_json(cfg)},
                   {"init_scale", scale},
                   {"stop_reason", to_string(res.stop_reason)},
                   {"iterations", res.iterations},
                   {"final_objective", res.trace.back().objective},
                   {"config", cfg.source}};
  io::write_json(dir / "manifest.json", manifest);

  if (cfg.with_full_eval) {
    const DenseMatrix x = obtain_x(cfg);
    io::write_json(dir / "metrics.json", to_json(metrics_for(cfg, x, res.factors, b, record)));
  }
  return res.stop_reason;
}

void cmd_evaluate(const ExperimentConfig& cfg) {
  const fs::path fdir = subdir(cfg, "factorize");
  FactorPair f{io::read_matrix_csv(fdir / "U.csv"), io::read_matrix_csv(fdir / "V.csv")};
  const Record record = load_record(subdir(cfg, "compressed"));
  const Built b = build(cfg, record);
  const DenseMatrix x = obtain_x(cfg);
  io::write_json(subdir(cfg, "evaluate") / "metrics.json",
                 to_json(metrics_for(cfg, x, f, b, record)));
}

void cmd_bench(const ExperimentConfig& cfg) {
  const auto& g = cfg.bench;
  if (g.k_grid.empty() || g.lambda_grid.empty() || g.seeds.empty()) {
    throw ConfigError("bench needs nonempty k_grid, lambda_grid and seeds");
  }
  const DenseMatrix x = obtain_x(cfg);

  struct Run {
    std::size_t k;
    double lambda;
    std::uint64_t seed;
    std::size_t iters = 0;
    double rel = 0.0;
    double cos = 0.0;
  };
  std::vector<Run> runs;
  for (std::size_t k : g.k_grid)
    for (double l : g.lambda_grid)
      for (std::uint64_t s : g.seeds) runs.push_back({k, l, s});

  const fs::path dir = subdir(cfg, "bench");
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        Run& run = runs[i];
        ExperimentConfig local = cfg;
        local.sketch.k = run.k;
        local.sketch.seed = run.seed;
        local.solver.seed = run.seed;
        local.params.lambda = run.lambda;
        if (cfg.problem == ProblemShape::two_sided) {
          local.params.lambda1 = run.lambda;
          local.params.lambda2 = run.lambda;
        }
        const Record record = compress(local, x);
        const Built b = build(local, record);
        const double scale = init_scale(record, local.rank);
        const SolveResult res = solve(b.problem, init_factors(x.rows(), x.cols(), local.rank, run.seed, scale),
                                      local.solver, local.method);
        run.iters = res.iterations;
        const MetricsReport rep = metrics_for(local, x, res.factors, b, record);
        run.rel = rep.relative_error;
        run.cos = rep.cosine_similarity;
        std::ostringstream name;
        name << "k" << run.k << "_lambda" << io::format_double(run.lambda) << "_seed" << run.seed;
        json manifest = {{"k", run.k},
                         {"lambda", run.lambda},
                         {"seed", run.seed},
                         {"params", params_json(local, b.params)},
                         {"stop_reason", to_string(res.stop_reason)},
                         {"iterations", res.iterations},
                         {"metrics", to_json(rep)}};
        io::write_json(dir / name.str() / "manifest.json", manifest);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  fs::create_directories(dir);
  std::ofstream out(dir / "bench.csv", std::ios::trunc);
  if (!out) throw IoError("cannot write bench.csv");
  out << "k,lambda,seed,iters,relative_error,cosine_similarity\n";
  for (const Run& r : runs) {
    out << r.k << ',' << io::format_double(r.lambda) << ',' << r.seed << ',' << r.iters << ','
        << io::format_double(r.rel) << ',' << io::format_double(r.cos) << '\n';
  }
  io::write_json(dir / "manifest.json", {{"version", kVersion}, {"rng", kRngName},
                                         {"runs", runs.size()}, {"config", cfg.source}});
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Nonnegative matrix factorization from sketched data"};
  app.require_subcommand(1);
  std::string config_path;
  std::string output;
  std::optional<std::uint64_t> seed;
  bool full_eval = false;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--output", output, "Output directory (overrides output_dir)");
  app.add_option("--seed", seed, "Overrides every seed in the config");
  app.add_flag("--with-full-eval", full_eval, "Score factors against the full data after solving");
  app.fallthrough();
  for (const char* name : {"generate", "compress", "factorize", "evaluate", "bench"}) {
    app.add_subcommand(name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (!output.empty()) cfg.output_dir = output;
    if (full_eval) cfg.with_full_eval = true;
    if (seed) {
      if (auto* spec = std::get_if<SyntheticSpec>(&cfg.data)) spec->seed = *seed;
      cfg.sketch.seed = *seed;
      cfg.solver.seed = *seed;
    }

    if (cmd == "generate") {
      cmd_generate(cfg);
    } else if (cmd == "compress") {
      cmd_compress(cfg);
    } else if (cmd == "factorize") {
      if (cmd_factorize(cfg) == StopReason::diverged) {
        std::cerr << "error: solver diverged\n";
        return 3;
      }
    } else if (cmd == "evaluate") {
      cmd_evaluate(cfg);
    } else {
      cmd_bench(cfg);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InsufficientSigma& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const LambdaOutOfRange& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UncertifiedProblem& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidDim& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const NegativeData& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const DimOverflow& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace sketchnmf::cli
