#include "ttr/nn/checkpoint.hpp"

#include "ttr/util/error.hpp"
#include "ttr/util/fs.hpp"
#include "util/serde.hpp"

namespace ttr::nn {

namespace {

constexpr const char* kFormat = "ttnet-checkpoint";
constexpr int kVersion = 1;

}  // namespace

std::string checkpoint_to_json(const TTnetModel& model) {
  model.validate();
  serde::Json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["task"] = std::string(data::task_name(model.task));
  doc["num_classes"] = model.num_classes;
  doc["class_labels"] = model.class_labels;
  doc["schema"] = serde::schema_json(model.schema);
  doc["spec"] = serde::spec_json(model.block_spec());
  doc["input_bn"] = serde::bn_json(model.input_bn);
  serde::Json blocks = serde::Json::array();
  for (const LttBlockParams& b : model.blocks) {
    serde::Json jb;
    jb["w1"] = b.w1;
    jb["w2"] = b.w2;
    if (b.spec.has_inner_bn) jb["inner_bn"] = serde::bn_json(b.inner_bn);
    blocks.push_back(std::move(jb));
  }
  doc["blocks"] = std::move(blocks);
  doc["final_bn"] = serde::bn_json(model.final_bn);
  serde::Json head;
  head["mode"] = std::string(head_mode_name(model.head_mode));
  head["w"] = model.head_w;
  if (model.head_mode == HeadMode::BinarySparse) head["mask"] = model.head_mask;
  head["bias"] = model.head_bias;
  head["dropout"] = model.dropout_p;
  doc["head"] = std::move(head);
  doc["target_affine"] = serde::affine_json(model.target_affine);
  doc["bn_finalized"] = model.bn_finalized;
  doc["seed"] = model.seed;
  doc["config_digest"] = model.config_digest;
  return doc.dump(1);
}

TTnetModel checkpoint_from_json(std::string_view text,
                                const std::string& origin) {
  const serde::Json doc = serde::parse_document(text, origin);
  if (!doc.is_object()) {
    throw ParseError(origin + ": checkpoint must be a JSON object");
  }
  if (serde::field_str(doc, "format") != kFormat) {
    throw ParseError(origin + ": not a " + std::string(kFormat) + " file");
  }
  if (serde::field_int(doc, "version") != kVersion) {
    throw ParseError(origin + ": unsupported checkpoint version " +
                     std::to_string(serde::field_int(doc, "version")));
  }

  TTnetModel model;
  model.task = data::task_from_name(serde::field_str(doc, "task"));
  model.num_classes =
      static_cast<std::size_t>(serde::field_u64(doc, "num_classes"));
  model.class_labels = serde::field_svec(doc, "class_labels");
  model.schema = serde::schema_from(serde::field(doc, "schema"));
  const LttBlockSpec spec = serde::spec_from(serde::field(doc, "spec"));
  model.input_bn = serde::bn_from(serde::field(doc, "input_bn"));

  const serde::Json& blocks = serde::field(doc, "blocks");
  if (!blocks.is_array() || blocks.empty()) {
    throw ParseError(origin + ": blocks must be a non-empty array");
  }
  model.blocks.reserve(blocks.size());
  for (const serde::Json& jb : blocks) {
    LttBlockParams b;
    b.spec = spec;
    b.w1 = serde::field_dvec(jb, "w1");
    b.w2 = serde::field_dvec(jb, "w2");
    if (spec.has_inner_bn) {
      b.inner_bn = serde::bn_from(serde::field(jb, "inner_bn"));
    } else {
      b.inner_bn.init(static_cast<std::size_t>(spec.amplification));
    }
    model.blocks.push_back(std::move(b));
  }

  model.final_bn = serde::bn_from(serde::field(doc, "final_bn"));
  const serde::Json& head = serde::field(doc, "head");
  model.head_mode = head_mode_from_name(serde::field_str(head, "mode"));
  model.head_w = serde::field_dvec(head, "w");
  if (model.head_mode == HeadMode::BinarySparse) {
    model.head_mask = serde::field_dvec(head, "mask");
  }
  model.head_bias = serde::field_dvec(head, "bias");
  model.dropout_p = serde::field_num(head, "dropout");
  model.target_affine = serde::affine_from(serde::field(doc, "target_affine"));
  model.bn_finalized = serde::field_bool(doc, "bn_finalized");
  model.seed = serde::field_u64(doc, "seed");
  model.config_digest = serde::field_str(doc, "config_digest");
  model.validate();
  return model;
}

void save_checkpoint(const TTnetModel& model, const std::string& path) {
  write_file(path, checkpoint_to_json(model));
}

TTnetModel load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_file(path), path);
}

}  // namespace ttr::nn
