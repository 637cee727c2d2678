#include "util/serde.hpp"

#include "ttr/util/error.hpp"

namespace ttr::serde {

Json parse_document(std::string_view text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

const Json& field(const Json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw ParseError("missing field '" + std::string(key) + "'");
  }
  return *it;
}

double field_num(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_number()) {
    throw ParseError("field '" + std::string(key) + "' is not a number");
  }
  return v.get<double>();
}

std::int64_t field_int(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_number_integer()) {
    throw ParseError("field '" + std::string(key) + "' is not an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t field_u64(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0)) {
    throw ParseError("field '" + std::string(key) +
                     "' is not a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool field_bool(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_boolean()) {
    throw ParseError("field '" + std::string(key) + "' is not a boolean");
  }
  return v.get<bool>();
}

std::string field_str(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_string()) {
    throw ParseError("field '" + std::string(key) + "' is not a string");
  }
  return v.get<std::string>();
}

std::vector<double> field_dvec(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_array()) {
    throw ParseError("field '" + std::string(key) + "' is not an array");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const Json& e : v) {
    if (!e.is_number()) {
      throw ParseError("field '" + std::string(key) +
                       "' holds a non-numeric element");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::string> field_svec(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_array()) {
    throw ParseError("field '" + std::string(key) + "' is not an array");
  }
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const Json& e : v) {
    if (!e.is_string()) {
      throw ParseError("field '" + std::string(key) +
                       "' holds a non-string element");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

Json schema_json(const data::FeatureSchema& schema) {
  Json cols = Json::array();
  for (const data::Column& c : schema.columns) {
    Json jc;
    jc["name"] = c.name;
    jc["kind"] = std::string(data::column_kind_name(c.kind));
    jc["group"] = c.group_id ? Json(*c.group_id) : Json(nullptr);
    jc["category"] = c.category_label ? Json(*c.category_label) : Json(nullptr);
    cols.push_back(std::move(jc));
  }
  Json doc;
  doc["columns"] = std::move(cols);
  return doc;
}

data::FeatureSchema schema_from(const Json& doc) {
  const Json& cols = field(doc, "columns");
  if (!cols.is_array()) throw ParseError("schema columns must be an array");
  data::FeatureSchema schema;
  schema.columns.reserve(cols.size());
  for (const Json& jc : cols) {
    data::Column c;
    c.name = field_str(jc, "name");
    c.kind = data::column_kind_from_name(field_str(jc, "kind"));
    const Json& group = field(jc, "group");
    if (!group.is_null()) {
      if (!group.is_number_integer()) {
        throw ParseError("schema column group must be an integer or null");
      }
      c.group_id = group.get<int>();
    }
    const Json& category = field(jc, "category");
    if (!category.is_null()) {
      if (!category.is_string()) {
        throw ParseError("schema column category must be a string or null");
      }
      c.category_label = category.get<std::string>();
    }
    schema.columns.push_back(std::move(c));
  }
  schema.validate();
  return schema;
}

Json bn_json(const nn::BatchNormParams& bn) {
  Json doc;
  doc["gamma"] = bn.gamma;
  doc["beta"] = bn.beta;
  doc["mean"] = bn.running_mean;
  doc["var"] = bn.running_var;
  return doc;
}

nn::BatchNormParams bn_from(const Json& doc) {
  nn::BatchNormParams bn;
  bn.gamma = field_dvec(doc, "gamma");
  bn.beta = field_dvec(doc, "beta");
  bn.running_mean = field_dvec(doc, "mean");
  bn.running_var = field_dvec(doc, "var");
  bn.validate();
  return bn;
}

Json spec_json(const nn::LttBlockSpec& spec) {
  Json doc;
  doc["patch_width"] = spec.patch_width;
  doc["stride"] = spec.stride;
  doc["amplification"] = spec.amplification;
  doc["kernel1"] = spec.kernel1;
  doc["kernel2"] = spec.kernel2;
  doc["inner_bn"] = spec.has_inner_bn;
  return doc;
}

nn::LttBlockSpec spec_from(const Json& doc) {
  nn::LttBlockSpec spec;
  spec.patch_width = static_cast<int>(field_int(doc, "patch_width"));
  spec.stride = static_cast<int>(field_int(doc, "stride"));
  spec.amplification = static_cast<int>(field_int(doc, "amplification"));
  spec.kernel1 = static_cast<int>(field_int(doc, "kernel1"));
  spec.kernel2 = static_cast<int>(field_int(doc, "kernel2"));
  spec.has_inner_bn = field_bool(doc, "inner_bn");
  spec.validate();
  return spec;
}

Json affine_json(const data::TargetAffine& affine) {
  Json doc;
  doc["mean"] = affine.mean;
  doc["sd"] = affine.sd;
  return doc;
}

data::TargetAffine affine_from(const Json& doc) {
  data::TargetAffine affine;
  affine.mean = field_num(doc, "mean");
  affine.sd = field_num(doc, "sd");
  return affine;
}

}  // namespace ttr::serde
