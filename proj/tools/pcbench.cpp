// pcbench: experiment harness for parameter-corruption robustness studies.
//
// Subcommands: train, defend, probe, layer-probe, quantize-eval, eta-stats,
// bound-check, ttest, report. Common flags: --config, --seed, --out.
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical divergence.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcdef/pcdef.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace pcdef;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* c = cmd->add_option("--config", args.config_path, "experiment config file");
  if (config_required) c->required();
  cmd->add_option("--seed", args.seed, "master RNG seed");
  cmd->add_option("--out", args.out_dir, "output directory");
}

fs::path ensure_out_dir(const CommonArgs& args) {
  fs::path dir(args.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data_error(args.out_dir + ": cannot create output directory");
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw data_error(path.string() + ": cannot open for writing");
  f << text;
}

// ---------------------------------------------------------------------------
// Config-driven experiment assembly
// ---------------------------------------------------------------------------

TrainTestSplit load_task(const Config& cfg, std::uint64_t seed) {
  std::string kind = cfg.require_string("task", "kind");
  Dataset data;
  if (kind == "synth_gaussians" || kind == "synth_moons" || kind == "synth_xor") {
    std::size_t count = static_cast<std::size_t>(cfg.get_u64("task", "count", 400));
    double noise = cfg.get_double("task", "noise", 0.1);
    data = synth_dataset(synth_kind_from_name(kind), count, noise, seed);
  } else if (kind == "idx") {
    data = load_idx(cfg.require_string("task", "images"), cfg.require_string("task", "labels"));
  } else if (kind == "csv") {
    data = load_csv(cfg.require_string("task", "path"));
  } else {
    throw config_error("task.kind must be one of synth_gaussians, synth_moons, synth_xor, "
                       "idx, csv; got '" + kind + "'");
  }
  return split_80_20(data, seed);
}

Activation activation_from_config(const Config& cfg) {
  std::string a = cfg.get_string("model", "activation", "relu");
  if (a == "relu") return Activation::Relu;
  if (a == "tanh") return Activation::Tanh;
  if (a == "identity") return Activation::Identity;
  throw config_error("model.activation must be relu, tanh or identity; got '" + a + "'");
}

Model model_from_config(const Config& cfg, const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> dims{data.features.cols()};
  for (double h : cfg.get_double_list("model", "hidden", {16.0, 16.0})) {
    if (h < 1.0) throw config_error("model.hidden entries must be >= 1");
    dims.push_back(static_cast<std::size_t>(h));
  }
  dims.push_back(std::max<std::size_t>(data.num_classes, 2));
  return Model::random(dims, activation_from_config(cfg), Head::SoftmaxCrossEntropy, seed);
}

SgdSpec sgd_from_config(const Config& cfg) {
  SgdSpec opt;
  opt.lr = cfg.get_double("train", "lr", 0.1);
  opt.momentum = cfg.get_double("train", "momentum", 0.9);
  opt.weight_decay = cfg.get_double("train", "weight_decay", 0.0);
  return opt;
}

DefenseVariant variant_from_name(const std::string& v) {
  if (v == "baseline") return DefenseVariant::Baseline;
  if (v == "multi_step_avg") return DefenseVariant::MultiStepAvg;
  if (v == "acrt") return DefenseVariant::Acrt;
  if (v == "sam") return DefenseVariant::Sam;
  if (v == "awp") return DefenseVariant::Awp;
  throw config_error("defense.variant must be baseline, multi_step_avg, acrt, sam or awp; "
                     "got '" + v + "'");
}

DefenseConfig defense_from_config(const Config& cfg, bool default_baseline) {
  DefenseConfig d;
  d.variant = variant_from_name(cfg.get_string(
      "defense", "variant", default_baseline ? "baseline" : "multi_step_avg"));
  d.K = static_cast<std::size_t>(cfg.get_u64("defense", "K", 2));
  d.epsilon = cfg.get_double("defense", "epsilon", 0.1);
  d.p = cfg.get_norm_order("defense", "p", inf_norm_order);
  d.n = static_cast<std::size_t>(cfg.get_u64("defense", "n", 0));
  d.alpha = cfg.get_double("defense", "alpha", 0.0);
  d.start_epoch = static_cast<std::size_t>(cfg.get_u64("defense", "start_epoch", 0));
  d.alpha_mix = cfg.get_double("defense", "alpha_mix", 1.0);
  d.substitutive = cfg.get_bool("defense", "substitutive", false);
  d.random_init = cfg.get_bool("defense", "random_init", false);
  d.awp.inner_K = static_cast<std::size_t>(cfg.get_u64("defense", "inner_K", 1));
  d.awp.input_eps = cfg.get_double("defense", "input_eps", 0.0);
  return d;
}

std::string train_report_csv(const TrainReport& report) {
  std::ostringstream os;
  os << "epoch,clean_loss,clean_accuracy,objective\n";
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const EpochStats& st = report.epochs[e];
    os << e << ',' << format_number(st.clean_loss) << ',' << format_number(st.clean_accuracy)
       << ',' << format_number(st.defense_objective) << '\n';
  }
  return os.str();
}

int run_training(const CommonArgs& args, bool defended) {
  Config cfg = Config::parse_file(args.config_path);
  fs::path out = ensure_out_dir(args);
  TrainTestSplit split = load_task(cfg, args.seed);
  Model model = model_from_config(cfg, split.train, args.seed);
  SgdSpec opt = sgd_from_config(cfg);
  std::size_t epochs = static_cast<std::size_t>(cfg.get_u64("train", "epochs", 30));
  std::size_t batch_size = static_cast<std::size_t>(cfg.get_u64("train", "batch_size", 32));
  DefenseConfig defense = defense_from_config(cfg, /*default_baseline=*/!defended);
  cfg.ensure_consumed();

  auto batches = split.train.batches(batch_size);
  auto [trained, report] = train(std::move(model), batches, defense, opt, epochs, args.seed);

  auto test_batches = split.test.batches(batch_size);
  double test_loss = mean_loss(trained, test_batches);
  double test_acc = batch_accuracy(trained, test_batches);

  std::string stem = defended ? "defended" : "trained";
  save_checkpoint(trained, defense.partition_for(trained.param_count()),
                  (out / (stem + ".pfck")).string());
  write_text(out / (stem + "_epochs.csv"), train_report_csv(report));

  ordered_json j;
  j["seed"] = args.seed;
  j["epochs"] = epochs;
  j["final_train_loss"] = report.epochs.back().clean_loss;
  j["final_train_accuracy"] = report.epochs.back().clean_accuracy;
  j["test_loss"] = test_loss;
  j["test_accuracy"] = test_acc;
  j["wall_seconds"] = report.wall_seconds;
  write_text(out / (stem + "_summary.json"), j.dump(2) + "\n");

  std::cout << stem << ": test_loss=" << format_number(test_loss)
            << " test_accuracy=" << format_number(test_acc) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// probe / layer-probe / quantize-eval
// ---------------------------------------------------------------------------

std::vector<ProbeSetting> sweep_from_config(const Config& cfg) {
  std::vector<ProbeSetting> grid;
  std::vector<std::string> methods =
      cfg.get_string_list("probe", "methods", {"multi_step"});
  if (methods.empty()) throw config_error("probe.methods must be nonempty");
  double p = cfg.get_norm_order("probe", "p", inf_norm_order);
  std::size_t n = static_cast<std::size_t>(cfg.get_u64("probe", "n", 0));
  std::size_t K = static_cast<std::size_t>(cfg.get_u64("probe", "K", 10));
  double alpha = cfg.get_double("probe", "alpha", 0.0);
  for (const std::string& m : methods) {
    if (m == "multi_step" || m == "gradient") {
      auto eps_grid = cfg.get_double_list("probe", "eps_grid", {0.05, 0.1, 0.2});
      if (eps_grid.empty()) throw config_error("probe.eps_grid must be nonempty");
      for (double eps : eps_grid) {
        ProbeSetting s;
        s.method = m == "multi_step" ? ProbeMethod::MultiStep : ProbeMethod::Gradient;
        s.epsilon = eps;
        s.p = p;
        s.n = n;
        s.K = K;
        s.alpha = alpha;
        grid.push_back(s);
      }
    } else if (m == "gaussian") {
      auto sigmas = cfg.get_double_list("probe", "sigma_grid", {0.05, 0.1});
      if (sigmas.empty()) throw config_error("probe.sigma_grid must be nonempty");
      for (double sigma : sigmas) {
        ProbeSetting s;
        s.method = ProbeMethod::Gaussian;
        s.sigma = sigma;
        grid.push_back(s);
      }
    } else if (m == "uniform") {
      auto bs = cfg.get_double_list("probe", "b_grid", {0.05, 0.1});
      if (bs.empty()) throw config_error("probe.b_grid must be nonempty");
      for (double b : bs) {
        ProbeSetting s;
        s.method = ProbeMethod::Uniform;
        s.b = b;
        grid.push_back(s);
      }
    } else if (m == "quantize") {
      auto bits = cfg.get_double_list("probe", "bits_grid", {8.0});
      if (bits.empty()) throw config_error("probe.bits_grid must be nonempty");
      for (double b : bits) {
        ProbeSetting s;
        s.method = ProbeMethod::Quantize;
        s.bits = static_cast<unsigned>(b);
        grid.push_back(s);
      }
    } else {
      throw config_error("probe.methods entries must be multi_step, gradient, gaussian, "
                         "uniform or quantize; got '" + m + "'");
    }
  }
  return grid;
}

std::string rows_to_json(const std::vector<ReportRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const ReportRow& r : rows) {
    ordered_json j;
    j["method"] = r.method;
    j["setting"] = r.setting;
    j["seed"] = r.seed;
    j["metric"] = r.metric;
    j["clean"] = r.clean;
    if (r.error) {
      j["error"] = r.error_message;
    } else {
      j["corrupted"] = r.corrupted;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

int run_probe(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config_path);
  fs::path out = ensure_out_dir(args);
  std::string ckpt = cfg.require_string("probe", "checkpoint");
  std::size_t batch_size = static_cast<std::size_t>(cfg.get_u64("probe", "batch_size", 64));
  auto seed_list = cfg.get_u64_list("probe", "seeds", {args.seed});
  if (seed_list.empty()) throw config_error("probe.seeds must be nonempty");
  std::vector<ProbeSetting> grid = sweep_from_config(cfg);
  TrainTestSplit split = load_task(cfg, args.seed);
  cfg.ensure_consumed();

  auto [model, part] = load_checkpoint(ckpt);
  if (model.input_dim() != split.test.features.cols())
    throw data_error(ckpt + ": checkpoint input width does not match the task");
  std::vector<ReportRow> rows =
      run_probe_sweep(model, part, grid, split.test, batch_size, seed_list);
  write_text(out / "sweep.csv", rows_to_csv(rows));
  write_text(out / "sweep.json", rows_to_json(rows));
  std::cout << "probe: " << rows.size() << " rows -> " << (out / "sweep.csv").string() << '\n';
  return 0;
}

int run_layer_probe(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config_path);
  fs::path out = ensure_out_dir(args);
  std::string ckpt = cfg.require_string("layer_probe", "checkpoint");
  double eps = cfg.get_double("layer_probe", "epsilon", 0.1);
  double p = cfg.get_norm_order("layer_probe", "p", inf_norm_order);
  std::size_t n = static_cast<std::size_t>(cfg.get_u64("layer_probe", "n", 0));
  std::size_t K = static_cast<std::size_t>(cfg.get_u64("layer_probe", "K", 10));
  double alpha = cfg.get_double("layer_probe", "alpha", 0.0);
  std::size_t batch_size =
      static_cast<std::size_t>(cfg.get_u64("layer_probe", "batch_size", 64));
  TrainTestSplit split = load_task(cfg, args.seed);
  cfg.ensure_consumed();

  auto [model, part] = load_checkpoint(ckpt);
  std::size_t k_total = model.param_count();
  ConstraintSet S(p, eps, n == 0 ? k_total : n);
  double a = alpha > 0.0 ? alpha : 1.5 * eps / static_cast<double>(K);
  auto rows = layer_probe(model, S, K, a, split.test, batch_size, args.seed);
  write_text(out / "layers.csv", layer_rows_to_csv(rows));
  std::cout << "layer-probe: " << rows.size() << " groups -> "
            << (out / "layers.csv").string() << '\n';
  return 0;
}

int run_quantize_eval(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config_path);
  fs::path out = ensure_out_dir(args);
  std::string ckpt = cfg.require_string("quantize", "checkpoint");
  auto bits_grid = cfg.get_double_list("quantize", "bits_grid", {8.0, 4.0});
  if (bits_grid.empty()) throw config_error("quantize.bits_grid must be nonempty");
  std::size_t batch_size = static_cast<std::size_t>(cfg.get_u64("quantize", "batch_size", 64));
  TrainTestSplit split = load_task(cfg, args.seed);
  cfg.ensure_consumed();

  auto [model, part] = load_checkpoint(ckpt);
  auto batches = split.test.batches(batch_size);
  double clean_loss = mean_loss(model, batches);
  double clean_acc = batch_accuracy(model, batches);
  std::ostringstream os;
  os << "bits,clean_loss,quantized_loss,clean_accuracy,quantized_accuracy\n";
  for (double b : bits_grid) {
    Model q = quantize_model(model, static_cast<unsigned>(b));
    os << static_cast<unsigned>(b) << ',' << format_number(clean_loss) << ','
       << format_number(mean_loss(q, batches)) << ',' << format_number(clean_acc) << ','
       << format_number(batch_accuracy(q, batches)) << '\n';
  }
  write_text(out / "quantize.csv", os.str());
  std::cout << "quantize-eval -> " << (out / "quantize.csv").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eta-stats / bound-check / ttest / report
// ---------------------------------------------------------------------------

int run_eta_stats(const CommonArgs& args) {
  std::size_t k = 100, samples = 100000, grid = 200;
  if (!args.config_path.empty()) {
    Config cfg = Config::parse_file(args.config_path);
    k = static_cast<std::size_t>(cfg.get_u64("eta", "k", 100));
    samples = static_cast<std::size_t>(cfg.get_u64("eta", "samples", 100000));
    grid = static_cast<std::size_t>(cfg.get_u64("eta", "grid", 200));
    cfg.ensure_consumed();
  }
  if (k < 2) throw config_error("eta.k must be >= 2");
  fs::path out = ensure_out_dir(args);

  // eta of an eps-sphere draw is scale-free; use eps = 1, g = e1.
  Vec g(k, 0.0);
  g[0] = 1.0;
  std::vector<double> etas;
  etas.reserve(samples);
  for (const Vec& a : sample_sphere(k, 1.0, samples, args.seed))
    etas.push_back(eta_statistic(a, g, 1.0));
  std::sort(etas.begin(), etas.end());

  double ks = 0.0;
  std::ostringstream os;
  os << "x,ecdf,cdf,pdf\n";
  for (std::size_t i = 0; i <= grid; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(grid);
    double ecdf = static_cast<double>(std::upper_bound(etas.begin(), etas.end(), x) -
                                      etas.begin()) /
                  static_cast<double>(samples);
    double cdf = eta_cdf(x, k);
    ks = std::max(ks, std::abs(ecdf - cdf));
    os << format_number(x) << ',' << format_number(ecdf) << ',' << format_number(cdf) << ','
       << format_number(eta_pdf(x, k)) << '\n';
  }
  write_text(out / "eta.csv", os.str());
  std::cout << "eta-stats: k=" << k << " samples=" << samples
            << " ks_sup_diff=" << format_number(ks) << '\n';
  return 0;
}

int run_bound_check(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config_path);
  fs::path out = ensure_out_dir(args);
  Vec diag = cfg.get_double_list("bound", "hessian_diag", {1.0, 1.0});
  Vec linear = cfg.get_double_list("bound", "gradient", {1.0, 0.0});
  auto eps_grid = cfg.get_double_list("bound", "eps_grid", {0.1, 0.05, 0.025});
  double p = cfg.get_norm_order("bound", "p", 2.0);
  std::size_t n = static_cast<std::size_t>(cfg.get_u64("bound", "n", 0));
  double sigma = cfg.get_double("bound", "sigma", 1.0);
  double delta = cfg.get_double("bound", "delta", 0.05);
  std::size_t dataset_size = static_cast<std::size_t>(cfg.get_u64("bound", "dataset_size", 1000));
  cfg.ensure_consumed();

  if (diag.size() != linear.size())
    throw config_error("bound.hessian_diag and bound.gradient must have the same length");
  QuadraticObjective q = QuadraticObjective::diagonal(diag, linear);
  std::size_t k = q.param_count();

  std::ostringstream os;
  os << "eps,delta_max,delta_hat,first_order,ratio,big_o_constant,pac_bayes_C,pac_bayes_R\n";
  for (double eps : eps_grid) {
    ConstraintSet S(p, eps, n == 0 ? k : n);
    ErrorBoundReport rep = error_bound_ratio(q, S);
    PacBayesBound pb = pac_bayes_bound_sphere(0.0, k, eps, sigma, dataset_size, delta);
    os << format_number(eps) << ',' << format_number(rep.delta_max) << ','
       << format_number(rep.delta_hat) << ',' << format_number(rep.first_order) << ','
       << format_number(rep.ratio) << ',' << format_number(rep.big_o_constant) << ','
       << format_number(pb.C) << ',' << format_number(pb.R) << '\n';
    std::cout << "eps=" << format_number(eps) << " ratio=" << format_number(rep.ratio) << '\n';
  }
  write_text(out / "bound.csv", os.str());
  return 0;
}

int run_ttest(const CommonArgs& args, double mean1, double std1, double mean2, double std2,
              std::uint64_t n, bool flags_given) {
  if (!flags_given) {
    if (args.config_path.empty())
      throw config_error("ttest: pass --mean1/--std1/--mean2/--std2/--n or --config");
    Config cfg = Config::parse_file(args.config_path);
    mean1 = cfg.get_double("ttest", "mean1", 0.0);
    std1 = cfg.get_double("ttest", "std1", 0.0);
    mean2 = cfg.get_double("ttest", "mean2", 0.0);
    std2 = cfg.get_double("ttest", "std2", 0.0);
    n = cfg.get_u64("ttest", "n", 3);
    cfg.ensure_consumed();
  }
  TTestResult r = two_sample_t(mean1, std1, mean2, std2, static_cast<std::size_t>(n));
  std::cout << "t=" << format_number(r.t) << " df=" << r.df
            << " significant=" << (r.significant ? "yes" : "no") << '\n';
  return 0;
}

// Summarize a sweep.csv: per (method, setting, metric), mean and std of the
// corrupted value over seeds.
int run_report(const CommonArgs& args, const std::string& sweep_path) {
  fs::path out = ensure_out_dir(args);
  fs::path in_path = sweep_path.empty() ? out / "sweep.csv" : fs::path(sweep_path);
  std::ifstream in(in_path);
  if (!in) throw data_error(in_path.string() + ": cannot open sweep csv");
  std::string line;
  if (!std::getline(in, line) || line != "method,setting,seed,metric,clean,corrupted,error")
    throw data_error(in_path.string() + ": unrecognized sweep csv header");

  struct Cell {
    std::vector<double> clean, corrupted;
    std::size_t errors = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Cell> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    // Fields: method, "setting", seed, metric, clean, corrupted, error.
    std::size_t q1 = line.find('"');
    std::size_t q2 = line.find('"', q1 + 1);
    if (q1 == std::string::npos || q2 == std::string::npos)
      throw data_error(in_path.string() + ": malformed row at line " + std::to_string(line_no));
    std::string method = line.substr(0, q1 - 1);
    std::string setting = line.substr(q1 + 1, q2 - q1 - 1);
    std::vector<std::string> rest;
    std::stringstream ss(line.substr(q2 + 2));
    std::string item;
    while (std::getline(ss, item, ',')) rest.push_back(item);
    while (rest.size() < 5) rest.push_back("");
    Cell& cell = cells[{method, setting, rest[1]}];
    if (!rest[4].empty()) {
      ++cell.errors;
      continue;
    }
    cell.clean.push_back(std::stod(rest[2]));
    cell.corrupted.push_back(std::stod(rest[3]));
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  auto std_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };

  std::ostringstream os;
  ordered_json arr = ordered_json::array();
  os << "method,setting,metric,seeds,clean_mean,corrupted_mean,corrupted_std,errors\n";
  for (const auto& [key, cell] : cells) {
    const auto& [method, setting, metric] = key;
    os << method << ",\"" << setting << "\"," << metric << ',' << cell.corrupted.size() << ','
       << format_number(mean_of(cell.clean)) << ',' << format_number(mean_of(cell.corrupted))
       << ',' << format_number(std_of(cell.corrupted)) << ',' << cell.errors << '\n';
    ordered_json j;
    j["method"] = method;
    j["setting"] = setting;
    j["metric"] = metric;
    j["seeds"] = cell.corrupted.size();
    j["clean_mean"] = mean_of(cell.clean);
    j["corrupted_mean"] = mean_of(cell.corrupted);
    j["corrupted_std"] = std_of(cell.corrupted);
    j["errors"] = cell.errors;
    arr.push_back(std::move(j));
  }
  write_text(out / "report.csv", os.str());
  write_text(out / "report.json", arr.dump(2) + "\n");
  std::cout << "report: " << cells.size() << " cells -> " << (out / "report.csv").string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parameter-corruption robustness bench"};
  app.require_subcommand(1);

  CommonArgs train_args, defend_args, probe_args, layer_args, quant_args, eta_args,
      bound_args, ttest_args, report_args;
  add_common(app.add_subcommand("train", "train a baseline model"), train_args);
  add_common(app.add_subcommand("defend", "train with a defense objective"), defend_args);
  add_common(app.add_subcommand("probe", "corruption sweep over a checkpoint"), probe_args);
  add_common(app.add_subcommand("layer-probe", "per-layer corruption probe"), layer_args);
  add_common(app.add_subcommand("quantize-eval", "quantization accuracy check"), quant_args);
  add_common(app.add_subcommand("eta-stats", "gradient-alignment statistics"), eta_args,
             /*config_required=*/false);
  add_common(app.add_subcommand("bound-check", "error-bound ratio on a toy quadratic"),
             bound_args);

  auto* ttest_cmd = app.add_subcommand("ttest", "two-sample t test");
  add_common(ttest_cmd, ttest_args, /*config_required=*/false);
  double mean1 = 0, std1 = 0, mean2 = 0, std2 = 0;
  std::uint64_t tn = 3;
  auto* m1 = ttest_cmd->add_option("--mean1", mean1, "sample 1 mean");
  ttest_cmd->add_option("--std1", std1, "sample 1 std");
  ttest_cmd->add_option("--mean2", mean2, "sample 2 mean");
  ttest_cmd->add_option("--std2", std2, "sample 2 std");
  ttest_cmd->add_option("--n", tn, "per-sample count");

  auto* report_cmd = app.add_subcommand("report", "summarize a sweep csv");
  add_common(report_cmd, report_args, /*config_required=*/false);
  std::string sweep_path;
  report_cmd->add_option("--sweep", sweep_path, "sweep csv path (default <out>/sweep.csv)");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand("train")) return run_training(train_args, false);
    if (app.got_subcommand("defend")) return run_training(defend_args, true);
    if (app.got_subcommand("probe")) return run_probe(probe_args);
    if (app.got_subcommand("layer-probe")) return run_layer_probe(layer_args);
    if (app.got_subcommand("quantize-eval")) return run_quantize_eval(quant_args);
    if (app.got_subcommand("eta-stats")) return run_eta_stats(eta_args);
    if (app.got_subcommand("bound-check")) return run_bound_check(bound_args);
    if (app.got_subcommand("ttest"))
      return run_ttest(ttest_args, mean1, std1, mean2, std2, tn, m1->count() > 0);
    if (app.got_subcommand("report")) return run_report(report_args, sweep_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const invalid_input& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const diverged_training& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return 4;
  } catch (const numerical_error& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
