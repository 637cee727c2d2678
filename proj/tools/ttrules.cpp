#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttr/bdd/robdd.hpp"
#include "ttr/data/dataset.hpp"
#include "ttr/infer/metrics.hpp"
#include "ttr/infer/predict.hpp"
#include "ttr/nn/checkpoint.hpp"
#include "ttr/nn/model.hpp"
#include "ttr/nn/train.hpp"
#include "ttr/rules/extract.hpp"
#include "ttr/rules/json_io.hpp"
#include "ttr/rules/ruleset.hpp"
#include "ttr/rules/text_io.hpp"
#include "ttr/synth/generators.hpp"
#include "ttr/util/error.hpp"
#include "ttr/util/fs.hpp"
#include "ttr/util/text.hpp"

namespace {

using ttr::ConfigError;
using ttr::ParseError;
using Json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Flat key = value configuration with [section] headers; every key the tool
// understands has a default here, and unknown keys are rejected so typos
// fail loudly instead of silently running defaults.

std::map<std::string, std::string> default_config() {
  return {
      {"data.source", "adult_like"},  // adult_like|compas_like|wide|separable|csv
      {"data.csv", ""},
      {"data.target", "income"},
      {"data.task", "binary"},
      {"data.declare", ""},  // name=binary|continuous|categorical, comma-separated
      {"data.rows", "48842"},
      {"data.cols", "20000"},
      {"data.seed", "7"},
      {"arch.patch_width", "5"},
      {"arch.stride", "5"},
      {"arch.filters", "10"},
      {"arch.amplification", "10"},
      {"arch.kernel1", "5"},
      {"arch.kernel2", "1"},
      {"arch.inner_bn", "true"},
      {"train.epochs", "10"},
      {"train.batch_size", "128"},
      {"train.learning_rate", "0.005"},
      {"train.seed", "1"},
      {"train.head", "binary_sparse"},
      {"train.dropout", "0.2"},
      {"train.mask_weight_decay", "1e-7"},
      {"optimize.dct", "true"},
      {"optimize.ttc_threshold", "0.9"},
      {"run.out", "runs/out"},
      {"run.folds", "5"},
      {"run.split_seed", "77"},
  };
}

class Config {
 public:
  Config() : values_(default_config()) {}

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    values_[key] = value;
  }

  void load_file(const std::string& path) {
    const std::string text = ttr::read_file(path);
    std::string section;
    int line_no = 0;
    std::size_t cursor = 0;
    while (cursor < text.size()) {
      std::size_t eol = text.find('\n', cursor);
      if (eol == std::string::npos) eol = text.size();
      std::string_view line = std::string_view(text).substr(cursor, eol - cursor);
      cursor = eol + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      line = ttr::trim(line);
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ParseError(path + ":" + std::to_string(line_no) +
                           ": unterminated section header");
        }
        section = std::string(ttr::trim(line.substr(1, line.size() - 2)));
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": expected key = value");
      }
      const std::string key = std::string(ttr::trim(line.substr(0, eq)));
      const std::string value = std::string(ttr::trim(line.substr(eq + 1)));
      const std::string full = section.empty() ? key : section + "." + key;
      if (!values_.count(full)) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": unknown config key '" + full + "'");
      }
      values_[full] = value;
    }
  }

  const std::string& str(const std::string& key) const {
    return values_.at(key);
  }

  long long integer(const std::string& key) const {
    const auto v = ttr::parse_int(str(key));
    if (!v) throw ConfigError("config " + key + ": '" + str(key) +
                              "' is not an integer");
    return *v;
  }

  double number(const std::string& key) const {
    const auto v = ttr::parse_double(str(key));
    if (!v) throw ConfigError("config " + key + ": '" + str(key) +
                              "' is not a number");
    return *v;
  }

  bool boolean(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config " + key + ": '" + v + "' is not a boolean");
  }

  std::uint64_t seed(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ConfigError("config " + key + ": seed must be >= 0");
    return static_cast<std::uint64_t>(v);
  }

  // Sorted key = value lines; the digest is FNV-1a over exactly this text.
  std::string echo_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  std::string digest() const { return ttr::hex_u64(ttr::fnv1a(echo_text())); }

 private:
  std::map<std::string, std::string> values_;
};

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  int fold = -1;
  bool all_folds = false;
  std::string out_override;
  std::string rules_kind = "auto";  // auto|raw|opt
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "config file (key = value)");
  cmd->add_option("--set", opts.sets, "override, e.g. --set train.epochs=20");
  cmd->add_option("--fold", opts.fold, "operate on one fold");
  cmd->add_flag("--all-folds", opts.all_folds, "operate on every fold");
  cmd->add_option("--out", opts.out_override, "output directory override");
}

Config resolve_config(const CommonOpts& opts) {
  Config cfg;
  if (!opts.config_path.empty()) cfg.load_file(opts.config_path);
  for (const std::string& kv : opts.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set needs key=value, got '" + kv + "'");
    }
    cfg.set(std::string(ttr::trim(std::string_view(kv).substr(0, eq))),
            std::string(ttr::trim(std::string_view(kv).substr(eq + 1))));
  }
  if (!opts.out_override.empty()) cfg.set("run.out", opts.out_override);
  return cfg;
}

void echo_config(const Config& cfg) {
  std::string text = cfg.echo_text();
  std::string out;
  out.reserve(text.size() + 64);
  std::size_t cursor = 0;
  while (cursor < text.size()) {
    const std::size_t eol = text.find('\n', cursor);
    out += "# " + text.substr(cursor, eol - cursor) + "\n";
    cursor = eol + 1;
  }
  out += "# digest " + cfg.digest() + " seed " + cfg.str("train.seed") + "\n";
  std::cout << out;
}

// ---------------------------------------------------------------------------
// Dataset and fold plumbing.

ttr::data::Dataset load_dataset(const Config& cfg) {
  const std::string& source = cfg.str("data.source");
  const auto rows = static_cast<std::size_t>(cfg.integer("data.rows"));
  const std::uint64_t seed = cfg.seed("data.seed");
  if (source == "adult_like") return ttr::synth::load_adult_like(rows, seed);
  if (source == "compas_like") return ttr::synth::load_compas_like(rows, seed);
  if (source == "wide") {
    return ttr::synth::make_wide(
        rows, static_cast<std::size_t>(cfg.integer("data.cols")), seed);
  }
  if (source == "separable") return ttr::synth::make_separable(rows, seed);
  if (source == "csv") {
    if (cfg.str("data.csv").empty()) {
      throw ConfigError("data.source = csv needs data.csv");
    }
    ttr::data::DeclaredKinds declared;
    for (const auto& item : ttr::split(cfg.str("data.declare"), ',')) {
      const std::string_view entry = ttr::trim(item);
      if (entry.empty()) continue;
      const std::size_t eq = entry.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("data.declare entries look like name=kind, got '" +
                          std::string(entry) + "'");
      }
      declared[std::string(ttr::trim(entry.substr(0, eq)))] =
          ttr::data::column_kind_from_name(ttr::trim(entry.substr(eq + 1)));
    }
    return ttr::data::load_csv(cfg.str("data.csv"), cfg.str("data.target"),
                               ttr::data::task_from_name(cfg.str("data.task")),
                               declared);
  }
  throw ConfigError("unknown data.source '" + source + "'");
}

std::vector<int> fold_scope(const Config& cfg, const CommonOpts& opts) {
  const int folds = static_cast<int>(cfg.integer("run.folds"));
  if (folds < 2) throw ConfigError("run.folds must be at least 2");
  if (opts.all_folds) {
    std::vector<int> all(static_cast<std::size_t>(folds));
    for (int k = 0; k < folds; ++k) all[static_cast<std::size_t>(k)] = k;
    return all;
  }
  const int k = opts.fold < 0 ? 0 : opts.fold;
  if (k >= folds) {
    throw ConfigError("--fold " + std::to_string(k) + " outside run.folds = " +
                      std::to_string(folds));
  }
  return {k};
}

std::string fold_dir(const Config& cfg, int fold) {
  const std::string dir =
      cfg.str("run.out") + "/fold" + std::to_string(fold);
  fs::create_directories(dir);
  return dir;
}

ttr::nn::TrainConfig train_config(const Config& cfg, int fold) {
  ttr::nn::TrainConfig tc;
  tc.block.patch_width = static_cast<int>(cfg.integer("arch.patch_width"));
  tc.block.stride = static_cast<int>(cfg.integer("arch.stride"));
  tc.block.amplification = static_cast<int>(cfg.integer("arch.amplification"));
  tc.block.kernel1 = static_cast<int>(cfg.integer("arch.kernel1"));
  tc.block.kernel2 = static_cast<int>(cfg.integer("arch.kernel2"));
  tc.block.has_inner_bn = cfg.boolean("arch.inner_bn");
  tc.filters = static_cast<int>(cfg.integer("arch.filters"));
  tc.epochs = static_cast<int>(cfg.integer("train.epochs"));
  tc.batch_size = static_cast<int>(cfg.integer("train.batch_size"));
  tc.learning_rate = cfg.number("train.learning_rate");
  tc.seed = cfg.seed("train.seed") + static_cast<std::uint64_t>(fold);
  tc.mask_weight_decay = cfg.number("train.mask_weight_decay");
  tc.head_mode = ttr::nn::head_mode_from_name(cfg.str("train.head"));
  tc.dropout_p = cfg.number("train.dropout");
  tc.config_digest = cfg.digest();
  return tc;
}

void append_jsonl(const std::string& path, const Json& record) {
  std::string line = record.dump();
  line.push_back('\n');
  std::string existing;
  if (fs::exists(path)) existing = ttr::read_file(path);
  ttr::write_file(path, existing + line);
}

struct Summary {
  std::vector<double> values;
  double mean() const {
    double s = 0.0;
    for (const double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
  }
  double stdev() const {
    if (values.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (const double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
  }
};

std::string pct(double fraction) {
  return fraction == 1.0 ? "100%" : ttr::format_sig(100.0 * fraction, 4) + "%";
}

// ---------------------------------------------------------------------------
// Shared evaluation pieces.

struct ModelMetrics {
  double accuracy = 0.0;
  std::optional<double> auc;
  std::optional<double> rmse_std;
};

ModelMetrics model_metrics(const ttr::nn::TTnetModel& model,
                           const ttr::data::Dataset& ds,
                           std::span<const std::uint32_t> rows) {
  const ttr::nn::ModelEvaluator ev(model);
  ModelMetrics out;
  if (model.task == ttr::data::Task::Regression) {
    std::vector<double> predicted(rows.size());
    std::vector<double> truth(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      predicted[i] = ev.predict(ds.row(rows[i]))[0];
      truth[i] = ds.y[rows[i]];
    }
    out.rmse_std = ttr::infer::rmse(predicted, truth);
    return out;
  }
  std::vector<int> labels(rows.size());
  std::vector<double> margins(rows.size());
  std::vector<double> truth(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::vector<double> scores = ev.predict(ds.row(rows[i]));
    labels[i] = ev.label_of(scores);
    if (scores.size() == 2) margins[i] = scores[1] - scores[0];
    truth[i] = ds.y[rows[i]];
  }
  out.accuracy = ttr::infer::accuracy(labels, truth);
  if (model.num_classes == 2) out.auc = ttr::infer::auc_score(margins, truth);
  return out;
}

ModelMetrics rules_metrics(const ttr::rules::RuleSet& rs,
                           const ttr::data::Dataset& ds,
                           std::span<const std::uint32_t> rows) {
  ModelMetrics out;
  if (rs.task == ttr::data::Task::Regression) {
    std::vector<double> predicted(rows.size());
    std::vector<double> truth(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto p = ttr::infer::predict(rs, ds.row(rows[i]));
      predicted[i] = p.scores[0];
      truth[i] = ds.y[rows[i]];
    }
    out.rmse_std = ttr::infer::rmse(predicted, truth);
    return out;
  }
  std::vector<int> labels(rows.size());
  std::vector<double> margins(rows.size());
  std::vector<double> truth(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = ttr::infer::classify(rs, ds.row(rows[i]));
    labels[i] = p.label;
    if (p.scores.size() == 2) margins[i] = p.scores[1] - p.scores[0];
    truth[i] = ds.y[rows[i]];
  }
  out.accuracy = ttr::infer::accuracy(labels, truth);
  if (rs.num_classes == 2) out.auc = ttr::infer::auc_score(margins, truth);
  return out;
}

// Fraction of rows where the rule model reproduces the network's decision.
// Rule sets past raw extraction are only exact on one-hot-valid rows, so
// violating rows are skipped for them.
double exactness(const ttr::nn::TTnetModel& model,
                 const ttr::rules::RuleSet& rs, const ttr::data::Dataset& ds,
                 std::span<const std::uint32_t> rows) {
  const ttr::nn::ModelEvaluator ev(model);
  std::set<std::uint32_t> skip;
  if (rs.provenance != ttr::rules::Provenance::RawR) {
    for (const auto& v : ttr::data::validate_onehot(ds)) skip.insert(v.row);
  }
  std::size_t total = 0;
  std::size_t match = 0;
  for (const std::uint32_t r : rows) {
    if (skip.count(r)) continue;
    ++total;
    const std::vector<double> net = ev.predict(ds.row(r));
    const auto p = ttr::infer::predict(rs, ds.row(r));
    if (rs.task == ttr::data::Task::Regression) {
      if (net[0] == p.scores[0]) ++match;
    } else if (ev.label_of(net) == p.label) {
      ++match;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(match) / static_cast<double>(total);
}

std::string rules_path(const Config& cfg, int fold, const std::string& kind) {
  const std::string dir = fold_dir(cfg, fold);
  if (kind == "raw") return dir + "/rules.json";
  if (kind == "opt") return dir + "/rules_opt.json";
  const std::string opt = dir + "/rules_opt.json";
  return fs::exists(opt) ? opt : dir + "/rules.json";
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_train(const Config& cfg, const CommonOpts& opts) {
  echo_config(cfg);
  const ttr::data::Dataset ds = load_dataset(cfg);
  const ttr::data::SplitPlan plan = ttr::data::kfold_split(
      ds, cfg.seed("run.split_seed"),
      static_cast<int>(cfg.integer("run.folds")));
  Summary acc;
  Summary auc;
  Summary err;
  for (const int k : fold_scope(cfg, opts)) {
    const auto& fold = plan.folds[static_cast<std::size_t>(k)];
    const ttr::nn::TrainConfig tc = train_config(cfg, k);
    const auto started = std::chrono::steady_clock::now();
    const ttr::nn::TTnetModel model = ttr::nn::train(ds, fold.train, tc);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    const std::string dir = fold_dir(cfg, k);
    ttr::nn::save_checkpoint(model, dir + "/checkpoint.json");
    const ModelMetrics m = model_metrics(model, ds, fold.test);
    Json record{{"cmd", "train"},
                {"fold", k},
                {"seed", tc.seed},
                {"digest", cfg.digest()},
                {"train_seconds", secs}};
    std::cout << "fold " << k << ": trained in " << ttr::format_sig(secs, 3)
              << " s";
    if (ds.task == ttr::data::Task::Regression) {
      record["rmse_std"] = *m.rmse_std;
      err.values.push_back(*m.rmse_std);
      std::cout << ", test rmse " << ttr::format_sig(*m.rmse_std, 4);
    } else {
      record["accuracy"] = m.accuracy;
      acc.values.push_back(m.accuracy);
      std::cout << ", test accuracy " << ttr::format_sig(m.accuracy, 4);
      if (m.auc) {
        record["auc"] = *m.auc;
        auc.values.push_back(*m.auc);
        std::cout << ", auc " << ttr::format_sig(*m.auc, 4);
      }
    }
    std::cout << "\n";
    append_jsonl(dir + "/metrics.jsonl", record);
  }
  if (acc.values.size() > 1) {
    std::cout << "accuracy mean " << ttr::format_sig(acc.mean(), 4) << " std "
              << ttr::format_sig(acc.stdev(), 3) << "\n";
  }
  if (auc.values.size() > 1) {
    std::cout << "auc mean " << ttr::format_sig(auc.mean(), 4) << " std "
              << ttr::format_sig(auc.stdev(), 3) << "\n";
  }
  if (err.values.size() > 1) {
    std::cout << "rmse mean " << ttr::format_sig(err.mean(), 4) << " std "
              << ttr::format_sig(err.stdev(), 3) << "\n";
  }
  return 0;
}

int cmd_extract(const Config& cfg, const CommonOpts& opts) {
  echo_config(cfg);
  const ttr::data::Dataset ds = load_dataset(cfg);
  const ttr::data::SplitPlan plan = ttr::data::kfold_split(
      ds, cfg.seed("run.split_seed"),
      static_cast<int>(cfg.integer("run.folds")));
  for (const int k : fold_scope(cfg, opts)) {
    const std::string dir = fold_dir(cfg, k);
    const ttr::nn::TTnetModel model =
        ttr::nn::load_checkpoint(dir + "/checkpoint.json");
    const auto started = std::chrono::steady_clock::now();
    const ttr::rules::RuleSet rs = ttr::rules::extract_rules(model);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    ttr::rules::save_rules_json(rs, dir + "/rules.json");
    ttr::rules::save_rules_text(rs, dir + "/rules.txt");
    const auto& fold = plan.folds[static_cast<std::size_t>(k)];
    const double exact = exactness(model, rs, ds, fold.test);
    const ttr::rules::Complexity cx = ttr::rules::complexity(rs);
    std::cout << "fold " << k << ": " << cx.num_rules << " rules, "
              << cx.total_literals << " literals, extraction "
              << ttr::format_sig(secs, 3) << " s, exactness " << pct(exact)
              << "\n";
    append_jsonl(dir + "/metrics.jsonl",
                 Json{{"cmd", "extract"},
                      {"fold", k},
                      {"seed", rs.seed},
                      {"digest", rs.config_digest},
                      {"num_rules", cx.num_rules},
                      {"literals", cx.total_literals},
                      {"extract_seconds", secs},
                      {"exactness", exact}});
  }
  return 0;
}

int cmd_optimize(const Config& cfg, const CommonOpts& opts, bool dct_only,
                 std::optional<double> ttc_threshold) {
  echo_config(cfg);
  for (const int k : fold_scope(cfg, opts)) {
    const std::string dir = fold_dir(cfg, k);
    const ttr::nn::TTnetModel model =
        ttr::nn::load_checkpoint(dir + "/checkpoint.json");
    ttr::rules::RuleSet rs =
        ttr::rules::load_rules_json(dir + "/rules.json");
    const ttr::rules::Complexity before = ttr::rules::complexity(rs);
    if (cfg.boolean("optimize.dct")) {
      rs = ttr::rules::apply_dct(rs, rs.schema);
    }
    const ttr::rules::Complexity after_dct = ttr::rules::complexity(rs);
    if (!dct_only) {
      const double threshold =
          ttc_threshold ? *ttc_threshold : cfg.number("optimize.ttc_threshold");
      rs = ttr::rules::dedup_filters(rs, model, threshold);
    }
    const ttr::rules::Complexity after = ttr::rules::complexity(rs);
    ttr::rules::save_rules_json(rs, dir + "/rules_opt.json");
    ttr::rules::save_rules_text(rs, dir + "/rules_opt.txt");
    const double ratio =
        after.total_literals == 0
            ? static_cast<double>(before.total_literals)
            : static_cast<double>(before.total_literals) /
                  static_cast<double>(after.total_literals);
    std::cout << "fold " << k << ": rules " << before.num_rules << " -> "
              << after.num_rules << ", literals " << before.total_literals
              << " -> " << after.total_literals << " ("
              << ttr::format_sig(ratio, 3) << "x)\n";
    append_jsonl(dir + "/metrics.jsonl",
                 Json{{"cmd", "optimize"},
                      {"fold", k},
                      {"seed", rs.seed},
                      {"digest", rs.config_digest},
                      {"rules_before", before.num_rules},
                      {"rules_after", after.num_rules},
                      {"literals_before", before.total_literals},
                      {"literals_dct", after_dct.total_literals},
                      {"literals_after", after.total_literals}});
  }
  return 0;
}

int cmd_eval(const Config& cfg, const CommonOpts& opts) {
  echo_config(cfg);
  const ttr::data::Dataset ds = load_dataset(cfg);
  const ttr::data::SplitPlan plan = ttr::data::kfold_split(
      ds, cfg.seed("run.split_seed"),
      static_cast<int>(cfg.integer("run.folds")));
  Summary acc;
  for (const int k : fold_scope(cfg, opts)) {
    const std::string dir = fold_dir(cfg, k);
    const std::string path = rules_path(cfg, k, opts.rules_kind);
    const ttr::rules::RuleSet rs = ttr::rules::load_rules_json(path);
    const auto& fold = plan.folds[static_cast<std::size_t>(k)];
    const ModelMetrics m = rules_metrics(rs, ds, fold.test);
    const ttr::rules::Complexity cx = ttr::rules::complexity(rs);
    Json record{{"cmd", "eval"},
                {"fold", k},
                {"seed", rs.seed},
                {"digest", rs.config_digest},
                {"rules_file", fs::path(path).filename().string()},
                {"num_rules", cx.num_rules},
                {"literals", cx.total_literals}};
    std::cout << "fold " << k << " [" << fs::path(path).filename().string()
              << "]: " << cx.num_rules << " rules, " << cx.total_literals
              << " literals";
    if (ds.task == ttr::data::Task::Regression) {
      record["rmse_std"] = *m.rmse_std;
      std::cout << ", rmse " << ttr::format_sig(*m.rmse_std, 4);
    } else {
      record["accuracy"] = m.accuracy;
      acc.values.push_back(m.accuracy);
      std::cout << ", accuracy " << ttr::format_sig(m.accuracy, 4);
      if (m.auc) {
        record["auc"] = *m.auc;
        std::cout << ", auc " << ttr::format_sig(*m.auc, 4);
      }
    }
    const std::string ckpt = dir + "/checkpoint.json";
    if (fs::exists(ckpt)) {
      const ttr::nn::TTnetModel model = ttr::nn::load_checkpoint(ckpt);
      const double exact = exactness(model, rs, ds, fold.test);
      record["exactness"] = exact;
      std::cout << ", exactness: " << pct(exact);
    }
    std::cout << "\n";
    append_jsonl(dir + "/metrics.jsonl", record);
  }
  if (acc.values.size() > 1) {
    std::cout << "accuracy mean " << ttr::format_sig(acc.mean(), 4) << " std "
              << ttr::format_sig(acc.stdev(), 3) << "\n";
  }
  return 0;
}

int cmd_predict(const Config& cfg, const CommonOpts& opts, long long limit,
                const std::string& out_file) {
  echo_config(cfg);
  const ttr::data::Dataset ds = load_dataset(cfg);
  const ttr::data::SplitPlan plan = ttr::data::kfold_split(
      ds, cfg.seed("run.split_seed"),
      static_cast<int>(cfg.integer("run.folds")));
  const int k = fold_scope(cfg, opts).front();
  const ttr::rules::RuleSet rs =
      ttr::rules::load_rules_json(rules_path(cfg, k, opts.rules_kind));
  const auto& rows = plan.folds[static_cast<std::size_t>(k)].test;
  std::string out;
  std::size_t count = rows.size();
  if (limit > 0 && static_cast<std::size_t>(limit) < count) {
    count = static_cast<std::size_t>(limit);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t r = rows[i];
    const auto p = ttr::infer::predict(rs, ds.row(r));
    Json record{{"row", r}, {"scores", p.scores}};
    if (rs.task == ttr::data::Task::Regression) {
      record["value"] = p.value;
    } else {
      record["label"] = p.label;
      if (static_cast<std::size_t>(p.label) < rs.class_labels.size()) {
        record["class"] = rs.class_labels[static_cast<std::size_t>(p.label)];
      }
    }
    out += record.dump();
    out.push_back('\n');
  }
  if (out_file.empty()) {
    std::cout << out;
  } else {
    ttr::write_file(out_file, out);
    std::cout << "wrote " << count << " predictions to " << out_file << "\n";
  }
  return 0;
}

int cmd_export_dot(const Config& cfg, const CommonOpts& opts,
                   bool minimize_order) {
  echo_config(cfg);
  for (const int k : fold_scope(cfg, opts)) {
    const std::string dir = fold_dir(cfg, k);
    const ttr::rules::RuleSet rs =
        ttr::rules::load_rules_json(rules_path(cfg, k, opts.rules_kind));
    const std::string dot_dir = dir + "/dot";
    fs::create_directories(dot_dir);
    Json index = Json::object();
    for (const ttr::rules::Rule& rule : rs.rules) {
      std::vector<std::string> labels(rule.conditions.size());
      for (std::size_t j = 0; j < rule.conditions.size(); ++j) {
        labels[j] = rule.conditions[j].display();
      }
      ttr::bdd::Robdd bdd;
      if (minimize_order) {
        bdd = ttr::bdd::build_from_dnf(rule.dnf,
                                       ttr::bdd::find_small_order(rule.dnf));
      } else {
        bdd = ttr::bdd::build_from_dnf(rule.dnf);
      }
      ttr::bdd::DotOptions options;
      options.graph_name = "rule_" + std::to_string(rule.rule_id);
      std::string weights;
      for (std::size_t c = 0; c < rule.weights.size(); ++c) {
        if (c) weights += ", ";
        weights += ttr::format_sig(rule.weights[c], 4);
      }
      options.true_label = "+[" + weights + "]";
      const std::string name = "rule_" + std::to_string(rule.rule_id) + ".dot";
      ttr::write_file(dot_dir + "/" + name,
                      "// config " + rs.config_digest + " seed " +
                          std::to_string(rs.seed) + "\n" +
                          ttr::bdd::to_dot(bdd, labels, options));
      index[std::to_string(rule.rule_id)] =
          Json{{"path", "dot/" + name},
               {"weights", rule.weights},
               {"nodes", bdd.node_count()}};
    }
    const Json doc{{"digest", rs.config_digest},
                   {"seed", rs.seed},
                   {"rules", index}};
    ttr::write_file(dir + "/dot/index.json", doc.dump(1));
    std::cout << "fold " << k << ": wrote " << rs.rules.size()
              << " DOT files to " << dot_dir << "\n";
  }
  return 0;
}

int cmd_rules_export(const Config& cfg, const CommonOpts& opts) {
  echo_config(cfg);
  for (const int k : fold_scope(cfg, opts)) {
    const std::string path = rules_path(cfg, k, opts.rules_kind);
    const ttr::rules::RuleSet rs = ttr::rules::load_rules_json(path);
    const std::string out =
        path.substr(0, path.size() - 5) + ".txt";  // .json -> .txt
    ttr::rules::save_rules_text(rs, out);
    std::cout << "fold " << k << ": " << rs.rules.size() << " rules -> " << out
              << "\n";
  }
  return 0;
}

int cmd_rules_import(const Config& cfg, const CommonOpts& opts,
                     const std::string& text_path) {
  echo_config(cfg);
  const int k = fold_scope(cfg, opts).front();
  const std::string dir = fold_dir(cfg, k);
  // The schema travels with the JSON artifacts, not the grammar text.
  ttr::data::FeatureSchema schema;
  const std::string raw = dir + "/rules.json";
  const std::string ckpt = dir + "/checkpoint.json";
  if (fs::exists(raw)) {
    schema = ttr::rules::load_rules_json(raw).schema;
  } else if (fs::exists(ckpt)) {
    schema = ttr::nn::load_checkpoint(ckpt).schema;
  } else {
    throw ConfigError("rules-import needs " + raw + " or " + ckpt +
                      " for the feature schema");
  }
  const ttr::rules::RuleSet rs = ttr::rules::load_rules_text(text_path, schema);
  const std::string out = dir + "/imported.json";
  ttr::rules::save_rules_json(rs, out);
  const ttr::rules::Complexity cx = ttr::rules::complexity(rs);
  std::cout << "imported " << cx.num_rules << " rules (" << cx.total_literals
            << " literals) -> " << out << "\n";
  return 0;
}

int cmd_estimate(const std::vector<std::string>& args) {
  std::map<std::string, long long> kv;
  for (const std::string& arg : args) {
    const std::size_t eq = arg.find('=');
    std::optional<long long> v;
    if (eq != std::string::npos) {
      v = ttr::parse_int(std::string_view(arg).substr(eq + 1));
    }
    if (!v) {
      std::cerr << "estimate arguments look like n=5 L=100 s=5 F=10\n";
      return 2;
    }
    kv[arg.substr(0, eq)] = *v;
  }
  for (const char* need : {"n", "L", "s", "F"}) {
    if (!kv.count(need)) {
      std::cerr << "estimate: missing " << need << "=\n";
      return 2;
    }
  }
  std::cout << "# n=" << kv["n"] << " L=" << kv["L"] << " s=" << kv["s"]
            << " F=" << kv["F"] << "\n";
  std::cout << ttr::rules::estimate_complexity(
                   static_cast<int>(kv["n"]), static_cast<int>(kv["L"]),
                   static_cast<int>(kv["s"]), static_cast<int>(kv["F"]))
            << "\n";
  return 0;
}

int cmd_synth(const std::string& dataset, long long rows, long long seed,
              const std::string& out_path) {
  if (rows <= 0) throw ConfigError("synth: --rows must be positive");
  if (seed < 0) throw ConfigError("synth: --seed must be >= 0");
  std::string csv;
  if (dataset == "adult_like") {
    csv = ttr::synth::adult_like_csv(static_cast<std::size_t>(rows),
                                     static_cast<std::uint64_t>(seed));
  } else if (dataset == "compas_like") {
    csv = ttr::synth::compas_like_csv(static_cast<std::size_t>(rows),
                                      static_cast<std::uint64_t>(seed));
  } else {
    throw ConfigError("synth: dataset must be adult_like or compas_like");
  }
  ttr::write_file(out_path, csv);
  std::cout << "wrote " << rows << " rows to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truth-table network rule toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto* train = app.add_subcommand("train", "train one model per fold");
  add_common(train, opts);
  auto* extract =
      app.add_subcommand("extract", "extract the exact rule set per fold");
  add_common(extract, opts);

  auto* optimize =
      app.add_subcommand("optimize", "shrink rules (impossible-input "
                                     "reduction, correlated-filter merge)");
  add_common(optimize, opts);
  bool dct_only = false;
  std::optional<double> ttc_threshold;
  optimize->add_flag("--dct-only", dct_only,
                     "skip the correlated-filter merge");
  optimize->add_option("--ttc-threshold", ttc_threshold,
                       "correlation needed to merge two filters");

  auto* eval = app.add_subcommand("eval", "score a rule set on test rows");
  add_common(eval, opts);
  eval->add_option("--rules", opts.rules_kind, "raw, opt, or auto")
      ->check(CLI::IsMember({"raw", "opt", "auto"}));

  auto* predict =
      app.add_subcommand("predict", "JSON-lines predictions for test rows");
  add_common(predict, opts);
  predict->add_option("--rules", opts.rules_kind, "raw, opt, or auto")
      ->check(CLI::IsMember({"raw", "opt", "auto"}));
  long long predict_limit = 0;
  std::string predict_out;
  predict->add_option("--limit", predict_limit, "emit at most N rows");
  predict->add_option("--out-file", predict_out, "write here instead of stdout");

  auto* export_dot =
      app.add_subcommand("export-dot", "one ROBDD DOT file per rule");
  add_common(export_dot, opts);
  export_dot->add_option("--rules", opts.rules_kind, "raw, opt, or auto")
      ->check(CLI::IsMember({"raw", "opt", "auto"}));
  bool minimize_order = false;
  export_dot->add_flag("--minimize-order", minimize_order,
                       "search for a smaller variable order");

  auto* rules_export =
      app.add_subcommand("rules-export", "rule-set JSON to grammar text");
  add_common(rules_export, opts);
  rules_export->add_option("--rules", opts.rules_kind, "raw, opt, or auto")
      ->check(CLI::IsMember({"raw", "opt", "auto"}));

  auto* rules_import =
      app.add_subcommand("rules-import", "grammar text to rule-set JSON");
  add_common(rules_import, opts);
  std::string import_text;
  rules_import->add_option("--text", import_text, "rules grammar text file")
      ->required();

  auto* estimate = app.add_subcommand(
      "estimate", "rule-set size bound from architecture numbers");
  std::vector<std::string> estimate_args;
  estimate->add_option("args", estimate_args, "n=5 L=100 s=5 F=10");

  auto* synth = app.add_subcommand("synth", "write a bundled dataset CSV");
  std::string synth_dataset;
  long long synth_rows = 0;
  long long synth_seed = 7;
  std::string synth_out;
  synth->add_option("--dataset", synth_dataset, "adult_like or compas_like")
      ->required();
  synth->add_option("--rows", synth_rows, "row count")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(estimate_args);
    if (synth->parsed()) {
      return cmd_synth(synth_dataset, synth_rows, synth_seed, synth_out);
    }
    const Config cfg = resolve_config(opts);
    if (train->parsed()) return cmd_train(cfg, opts);
    if (extract->parsed()) return cmd_extract(cfg, opts);
    if (optimize->parsed()) {
      return cmd_optimize(cfg, opts, dct_only, ttc_threshold);
    }
    if (eval->parsed()) return cmd_eval(cfg, opts);
    if (predict->parsed()) {
      return cmd_predict(cfg, opts, predict_limit, predict_out);
    }
    if (export_dot->parsed()) return cmd_export_dot(cfg, opts, minimize_order);
    if (rules_export->parsed()) return cmd_rules_export(cfg, opts);
    if (rules_import->parsed()) return cmd_rules_import(cfg, opts, import_text);
  } catch (const ttr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
