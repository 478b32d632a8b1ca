#pragma once

#include <iomanip>
#include <sstream>

#include "pcdef/checkpoint.hpp"
#include "pcdef/defense.hpp"
#include "pcdef/quantize.hpp"

namespace pcdef {

enum class ProbeMethod { MultiStep, Gradient, Gaussian, Uniform, Quantize };

inline std::string probe_method_name(ProbeMethod m) {
  switch (m) {
    case ProbeMethod::MultiStep: return "multi_step";
    case ProbeMethod::Gradient: return "gradient";
    case ProbeMethod::Gaussian: return "gaussian";
    case ProbeMethod::Uniform: return "uniform";
    case ProbeMethod::Quantize: return "quantize";
  }
  return "?";
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct ProbeSetting {
  ProbeMethod method = ProbeMethod::MultiStep;
  // multi-step / gradient
  double epsilon = 0.0;
  double p = 2.0;
  std::size_t n = 0;  // 0 = unrestricted
  std::size_t K = 1;
  double alpha = 0.0;  // 0 = 1.5 eps / K
  // random noise
  double sigma = 0.0;
  double b = 0.0;
  // quantization
  unsigned bits = 8;

  std::string label() const {
    std::ostringstream os;
    switch (method) {
      case ProbeMethod::MultiStep:
        os << "eps=" << epsilon << ",p=" << (is_inf_order(p) ? std::string("inf")
                                                             : format_number(p))
           << ",n=" << n << ",K=" << K << ",alpha=" << effective_alpha();
        break;
      case ProbeMethod::Gradient:
        os << "eps=" << epsilon << ",p=" << (is_inf_order(p) ? std::string("inf")
                                                             : format_number(p))
           << ",n=" << n;
        break;
      case ProbeMethod::Gaussian: os << "sigma=" << sigma; break;
      case ProbeMethod::Uniform: os << "b=" << b; break;
      case ProbeMethod::Quantize: os << "bits=" << bits; break;
    }
    return os.str();
  }
  double effective_alpha() const {
    return alpha > 0.0 ? alpha : 1.5 * epsilon / static_cast<double>(std::max<std::size_t>(K, 1));
  }
};

struct ReportRow {
  std::string method;
  std::string setting;
  std::uint64_t seed = 0;
  std::string metric;  // "loss" or "accuracy"
  double clean = 0.0;
  double corrupted = 0.0;
  bool error = false;
  std::string error_message;
};

inline void sort_rows(std::vector<ReportRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.method, a.setting, a.seed, a.metric) <
           std::tie(b.method, b.setting, b.seed, b.metric);
  });
}

// Evaluate one corruption setting against a model; rows for mean loss and
// (for classification heads) accuracy on the provided evaluation set.
inline std::vector<ReportRow> probe_once(const Model& model, const ParamPartition& part,
                                         const ProbeSetting& s, const Dataset& eval,
                                         std::size_t batch_size, std::uint64_t seed) {
  std::vector<Batch> batches = eval.batches(batch_size);
  double clean_loss = mean_loss(model, batches);
  double clean_acc = batch_accuracy(model, batches);

  std::vector<ReportRow> rows;
  auto emit = [&](double loss, double acc, bool err, const std::string& msg) {
    ReportRow r;
    r.method = probe_method_name(s.method);
    r.setting = s.label();
    r.seed = seed;
    r.error = err;
    r.error_message = msg;
    r.metric = "loss";
    r.clean = clean_loss;
    r.corrupted = loss;
    rows.push_back(r);
    if (model.head() == Head::SoftmaxCrossEntropy) {
      r.metric = "accuracy";
      r.clean = clean_acc;
      r.corrupted = acc;
      rows.push_back(r);
    }
  };

  try {
    std::size_t k = part.k();
    Model corrupted = model;
    switch (s.method) {
      case ProbeMethod::MultiStep: {
        ConstraintSet S(s.p, s.epsilon, s.n == 0 ? k : s.n);
        if (s.epsilon > 0.0) {
          CorruptionTrace tr = multi_step_corrupt(model, batches, S, s.K,
                                                  s.effective_alpha(), part, seed);
          corrupted = model.corrupted(tr.final, part);
        }
        break;
      }
      case ProbeMethod::Gradient: {
        ConstraintSet S(s.p, s.epsilon, s.n == 0 ? k : s.n);
        if (s.epsilon > 0.0) {
          ModelObjective obj(model, batches);
          GradientCorruption gc = gradient_corruption(obj, model.params(), S, part);
          corrupted = model.corrupted(gc.a, part);
        }
        break;
      }
      case ProbeMethod::Gaussian: {
        Vec a = sample_gaussian(k, s.sigma, 1, seed)[0];
        corrupted = model.corrupted(a, part);
        break;
      }
      case ProbeMethod::Uniform: {
        Vec a = sample_uniform(k, s.b, 1, seed)[0];
        corrupted = model.corrupted(a, part);
        break;
      }
      case ProbeMethod::Quantize:
        corrupted = quantize_model(model, s.bits, &part);
        break;
    }
    emit(mean_loss(corrupted, batches), batch_accuracy(corrupted, batches), false, "");
  } catch (const std::exception& e) {
    emit(std::numeric_limits<double>::quiet_NaN(),
         std::numeric_limits<double>::quiet_NaN(), true, e.what());
  }
  return rows;
}

// One row group per (setting, seed); failures are recorded and the sweep
// continues.
inline std::vector<ReportRow> run_probe_sweep(const Model& model, const ParamPartition& part,
                                              const std::vector<ProbeSetting>& settings,
                                              const Dataset& eval, std::size_t batch_size,
                                              const std::vector<std::uint64_t>& seeds) {
  if (settings.empty()) throw invalid_input("run_probe_sweep: empty grid");
  if (seeds.empty()) throw invalid_input("run_probe_sweep: need at least one seed");
  std::vector<ReportRow> rows;
  for (const ProbeSetting& s : settings)
    for (std::uint64_t seed : seeds) {
      auto r = probe_once(model, part, s, eval, batch_size, seed);
      rows.insert(rows.end(), r.begin(), r.end());
    }
  sort_rows(rows);
  return rows;
}

inline std::string rows_to_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "method,setting,seed,metric,clean,corrupted,error\n";
  for (const ReportRow& r : rows) {
    os << r.method << ",\"" << r.setting << "\"," << r.seed << ',' << r.metric << ','
       << format_number(r.clean) << ',' << format_number(r.corrupted) << ','
       << (r.error ? r.error_message : "") << '\n';
  }
  return os.str();
}

struct LayerProbeRow {
  std::string group;
  std::size_t param_count = 0;
  double baseline_loss = 0.0;
  double corrupted_loss = 0.0;
  double loss_change = 0.0;
};

// Multi-step corruption restricted to each layer in turn.
inline std::vector<LayerProbeRow> layer_probe(const Model& model, const ConstraintSet& S,
                                              std::size_t K, double alpha,
                                              const Dataset& eval, std::size_t batch_size,
                                              std::uint64_t seed) {
  std::vector<Batch> batches = eval.batches(batch_size);
  double base = mean_loss(model, batches);
  std::vector<LayerProbeRow> rows;
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    auto [begin, end] = model.layer_range(l);
    if (begin == end) throw invalid_input("layer_probe: empty group");
    ParamPartition part = ParamPartition::none(model.param_count());
    for (std::size_t i = begin; i < end; ++i) part.mask[i] = true;
    ConstraintSet Sl(S.p, S.epsilon, std::min(S.n, part.k()));
    CorruptionTrace tr = multi_step_corrupt(model, batches, Sl, K, alpha, part, seed);
    LayerProbeRow row;
    row.group = "layer" + std::to_string(l);
    row.param_count = end - begin;
    row.baseline_loss = base;
    row.corrupted_loss = tr.final_loss;
    row.loss_change = tr.final_loss - base;
    rows.push_back(row);
  }
  return rows;
}

inline std::string layer_rows_to_csv(const std::vector<LayerProbeRow>& rows) {
  std::ostringstream os;
  os << "group,param_count,baseline_loss,corrupted_loss,loss_change\n";
  for (const LayerProbeRow& r : rows)
    os << r.group << ',' << r.param_count << ',' << format_number(r.baseline_loss) << ','
       << format_number(r.corrupted_loss) << ',' << format_number(r.loss_change) << '\n';
  return os.str();
}

}  // namespace pcdef
