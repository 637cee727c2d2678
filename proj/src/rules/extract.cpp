#include "ttr/rules/extract.hpp"

#include <algorithm>
#include <cmath>

#include "ttr/logic/quine_mccluskey.hpp"
#include "ttr/util/error.hpp"

namespace ttr::rules {
namespace {

std::vector<std::uint8_t> realize_column(const logic::Dnf& dnf) {
  const std::size_t rows = static_cast<std::size_t>(1) << dnf.num_bits;
  std::vector<std::uint8_t> column(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    column[r] = dnf.eval_row(static_cast<std::uint32_t>(r)) ? 1 : 0;
  }
  return column;
}

std::vector<int> patch_columns(const nn::LttBlockSpec& spec, int patch) {
  std::vector<int> cols(static_cast<std::size_t>(spec.patch_width));
  for (int j = 0; j < spec.patch_width; ++j) {
    cols[static_cast<std::size_t>(j)] = patch * spec.stride + j;
  }
  return cols;
}

// What binarization does to each patch column: the learned transform can
// invert a 0/1 column or pin it constant, which moves (or grows) the set of
// assignments the patch can never see.
std::vector<logic::BitMap> realized_bit_maps(
    std::span<const Condition> conditions) {
  std::vector<logic::BitMap> maps(conditions.size());
  for (std::size_t j = 0; j < conditions.size(); ++j) {
    switch (conditions[j].form) {
      case ConditionForm::IsTrue:
        maps[j] = {0, 1, false};
        break;
      case ConditionForm::IsFalse:
        maps[j] = {1, 0, false};
        break;
      case ConditionForm::ConstTrue:
        maps[j] = {1, 1, false};
        break;
      case ConditionForm::ConstFalse:
        maps[j] = {0, 0, false};
        break;
      case ConditionForm::GreaterThan:
      case ConditionForm::LessThan:
        maps[j] = {0, 1, true};
        break;
    }
  }
  return maps;
}

}  // namespace

RuleSet extract_rules(const nn::TTnetModel& model) {
  if (!model.bn_finalized) {
    throw StateError("extract_rules: batch-norm statistics not finalized");
  }
  model.validate();

  const nn::LttBlockSpec& spec = model.block_spec();
  const std::size_t patches = model.patches();
  const std::size_t classes = model.num_classes;
  const auto conditions = input_conditions(model.input_bn, model.schema);
  const nn::FoldedHead head = nn::fold_head(model);

  RuleSet rs;
  rs.task = model.task;
  rs.num_classes = classes;
  rs.class_labels = model.class_labels;
  rs.schema = model.schema;
  rs.block_spec = spec;
  rs.provenance = Provenance::RawR;
  rs.bias = head.bias;
  rs.target_affine = model.target_affine;
  rs.seed = model.seed;
  rs.config_digest = model.config_digest;

  for (std::size_t f = 0; f < model.filters(); ++f) {
    rs.filter_tables.push_back(
        logic::enumerate_block(model.blocks[f], static_cast<int>(f)));
  }

  for (std::size_t f = 0; f < model.filters(); ++f) {
    const logic::TruthTable& table = rs.filter_tables[f];
    const logic::Dnf dnf = logic::quine_mccluskey(table.outputs);
    for (std::size_t p = 0; p < patches; ++p) {
      const std::size_t slot = f * patches + p;
      Rule rule;
      rule.rule_id = static_cast<int>(slot);
      rule.filter_id = static_cast<int>(f);
      rule.patch_id = static_cast<int>(p);
      rule.weights.resize(classes);
      bool any_nonzero = false;
      for (std::size_t c = 0; c < classes; ++c) {
        rule.weights[c] = head.w[slot * classes + c];
        any_nonzero = any_nonzero || rule.weights[c] != 0.0;
      }
      if (!any_nonzero) continue;
      rule.dnf = dnf;
      rule.realized = table.outputs;
      for (const int col : patch_columns(spec, static_cast<int>(p))) {
        rule.conditions.push_back(conditions[static_cast<std::size_t>(col)]);
      }
      rs.rules.push_back(std::move(rule));
    }
  }
  rs.validate();
  return rs;
}

RuleSet apply_dct(const RuleSet& rs, const data::FeatureSchema& schema) {
  if (rs.provenance != Provenance::RawR) {
    throw StateError("apply_dct: expected a raw extraction, got " +
                     std::string(provenance_name(rs.provenance)));
  }
  schema.validate();
  if (schema.size() != rs.schema.size()) {
    throw ContractError("apply_dct: schema width differs from the rule set's");
  }

  RuleSet out = rs;
  out.provenance = Provenance::DctReduced;
  for (Rule& rule : out.rules) {
    if (rule.filter_id < 0 || rule.patch_id < 0) continue;
    const auto cols = patch_columns(rs.block_spec, rule.patch_id);
    const logic::DcMask mask = logic::dc_mask_for_patch(
        schema, cols, realized_bit_maps(rule.conditions), rule.patch_id);
    if (mask.count() == 0) continue;
    const logic::TruthTable* table = nullptr;
    for (const logic::TruthTable& t : rs.filter_tables) {
      if (t.filter_id == rule.filter_id) table = &t;
    }
    if (table == nullptr) {
      throw ContractError("apply_dct: rule " + std::to_string(rule.rule_id) +
                          " references a filter with no stored table");
    }
    logic::Dnf reduced = logic::quine_mccluskey(table->outputs, mask.dont_care);
    // Freeing rows can only help; if the search still came back larger
    // (greedy fallback on a big core), the original cover stands.
    if (reduced.literal_count() <= rule.dnf.literal_count()) {
      rule.dnf = std::move(reduced);
      rule.realized = realize_column(rule.dnf);
    }
  }
  out.validate();
  return out;
}

double ttc(std::span<const std::uint8_t> table_a,
           std::span<const std::uint8_t> table_b) {
  if (table_a.size() != table_b.size() || table_a.empty()) {
    throw ContractError("ttc: output columns must have equal nonzero length");
  }
  std::size_t agree = 0;
  for (std::size_t r = 0; r < table_a.size(); ++r) {
    if ((table_a[r] != 0) == (table_b[r] != 0)) ++agree;
  }
  const double a =
      static_cast<double>(agree) / static_cast<double>(table_a.size());
  return a >= 0.5 ? a : -(1.0 - a);
}

RuleSet dedup_filters(const RuleSet& rs, const nn::TTnetModel& model,
                      double threshold) {
  if (threshold < 0.5 || threshold > 1.0) {
    throw ContractError("dedup_filters: threshold must lie in [0.5, 1]");
  }
  const std::size_t filters = model.filters();
  const std::size_t patches = model.patches();
  const std::size_t classes = rs.num_classes;
  if (model.num_classes != classes) {
    throw ContractError("dedup_filters: model and rule set disagree on classes");
  }

  // The merge works on raw filter tables; they are immutable through the
  // pipeline, so the stored ones must match the model.
  std::vector<logic::TruthTable> tables;
  for (std::size_t f = 0; f < filters; ++f) {
    tables.push_back(logic::enumerate_block(model.blocks[f], static_cast<int>(f)));
  }
  for (const logic::TruthTable& stored : rs.filter_tables) {
    if (stored.filter_id < 0 ||
        static_cast<std::size_t>(stored.filter_id) >= filters) {
      throw ContractError("dedup_filters: stored table for unknown filter");
    }
    if (stored.outputs != tables[static_cast<std::size_t>(stored.filter_id)].outputs) {
      throw ContractError("dedup_filters: stored filter table disagrees with model");
    }
  }

  // Slot grid of the current rules; hand-written rules (no slot) pass through.
  std::vector<const Rule*> grid(filters * patches, nullptr);
  std::vector<const Rule*> loose;
  for (const Rule& rule : rs.rules) {
    if (rule.filter_id >= 0 && rule.patch_id >= 0 &&
        static_cast<std::size_t>(rule.filter_id) < filters &&
        static_cast<std::size_t>(rule.patch_id) < patches) {
      grid[static_cast<std::size_t>(rule.filter_id) * patches +
           static_cast<std::size_t>(rule.patch_id)] = &rule;
    } else {
      loose.push_back(&rule);
    }
  }

  std::vector<std::vector<double>> weights(filters * patches,
                                           std::vector<double>(classes, 0.0));
  for (std::size_t slot = 0; slot < grid.size(); ++slot) {
    if (grid[slot] != nullptr) weights[slot] = grid[slot]->weights;
  }
  std::vector<double> bias = rs.bias;
  std::vector<char> deleted(filters, 0);

  for (std::size_t f = 0; f < filters; ++f) {
    if (deleted[f]) continue;
    for (std::size_t g = f + 1; g < filters; ++g) {
      if (deleted[g]) continue;
      const double t = ttc(tables[f].outputs, tables[g].outputs);
      if (std::abs(t) < threshold) continue;
      deleted[g] = 1;
      for (std::size_t p = 0; p < patches; ++p) {
        const std::size_t slot_f = f * patches + p;
        const std::size_t slot_g = g * patches + p;
        for (std::size_t c = 0; c < classes; ++c) {
          const double wg = weights[slot_g][c];
          if (t > 0.0) {
            weights[slot_f][c] += wg;
          } else {
            // g fires complementarily to f: w*g = w*(1 - f) = w - w*f.
            weights[slot_f][c] -= wg;
            bias[c] += wg;
          }
        }
      }
    }
  }

  RuleSet out;
  out.bias = std::move(bias);
  out.task = rs.task;
  out.num_classes = classes;
  out.class_labels = rs.class_labels;
  out.schema = rs.schema;
  out.block_spec = rs.block_spec;
  out.provenance = Provenance::TtcDeduped;
  out.target_affine = rs.target_affine;
  out.seed = rs.seed;
  out.config_digest = rs.config_digest;

  for (std::size_t f = 0; f < filters; ++f) {
    if (!deleted[f]) out.filter_tables.push_back(tables[f]);
  }

  const auto conditions = input_conditions(model.input_bn, model.schema);
  for (std::size_t f = 0; f < filters; ++f) {
    if (deleted[f]) continue;
    for (std::size_t p = 0; p < patches; ++p) {
      const std::size_t slot = f * patches + p;
      bool any_nonzero = false;
      for (const double w : weights[slot]) any_nonzero = any_nonzero || w != 0.0;
      if (!any_nonzero) continue;
      Rule rule;
      if (grid[slot] != nullptr) {
        rule = *grid[slot];
        rule.weights = weights[slot];
      } else {
        // The slot had no surviving rule before the merge; rebuild its DNF
        // from the raw table, at the same reduction level as the input set.
        rule.rule_id = static_cast<int>(slot);
        rule.filter_id = static_cast<int>(f);
        rule.patch_id = static_cast<int>(p);
        rule.weights = weights[slot];
        const auto cols = patch_columns(rs.block_spec, static_cast<int>(p));
        for (const int col : cols) {
          rule.conditions.push_back(conditions[static_cast<std::size_t>(col)]);
        }
        rule.dnf = logic::quine_mccluskey(tables[f].outputs);
        rule.realized = tables[f].outputs;
        if (rs.provenance == Provenance::DctReduced) {
          const logic::DcMask mask = logic::dc_mask_for_patch(
              rs.schema, cols, realized_bit_maps(rule.conditions),
              static_cast<int>(p));
          if (mask.count() != 0) {
            logic::Dnf reduced =
                logic::quine_mccluskey(tables[f].outputs, mask.dont_care);
            if (reduced.literal_count() <= rule.dnf.literal_count()) {
              rule.dnf = std::move(reduced);
              rule.realized = realize_column(rule.dnf);
            }
          }
        }
      }
      out.rules.push_back(std::move(rule));
    }
  }
  for (const Rule* rule : loose) out.rules.push_back(*rule);

  // A merge is only worth keeping when it simplifies the set; complement
  // merges can revive slots whose DNF outweighs what the deletion saved.
  const Complexity before = complexity(rs);
  const Complexity after = complexity(out);
  if (after.total_literals > before.total_literals ||
      after.num_rules > before.num_rules) {
    out = rs;
    out.provenance = Provenance::TtcDeduped;
  }
  out.validate();
  return out;
}

}  // namespace ttr::rules
