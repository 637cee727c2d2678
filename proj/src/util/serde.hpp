#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ttr/data/dataset.hpp"
#include "ttr/data/schema.hpp"
#include "ttr/nn/batchnorm.hpp"
#include "ttr/nn/ltt.hpp"

namespace ttr::serde {

using Json = nlohmann::json;

// Parses `text`; syntax failures become ParseError naming `origin`.
Json parse_document(std::string_view text, const std::string& origin);

// Checked field access; a missing key or wrong value type throws ParseError
// naming the key.
const Json& field(const Json& doc, const char* key);
double field_num(const Json& doc, const char* key);
std::int64_t field_int(const Json& doc, const char* key);
std::uint64_t field_u64(const Json& doc, const char* key);
bool field_bool(const Json& doc, const char* key);
std::string field_str(const Json& doc, const char* key);
std::vector<double> field_dvec(const Json& doc, const char* key);
std::vector<std::string> field_svec(const Json& doc, const char* key);

Json schema_json(const data::FeatureSchema& schema);
data::FeatureSchema schema_from(const Json& doc);

Json bn_json(const nn::BatchNormParams& bn);
nn::BatchNormParams bn_from(const Json& doc);

Json spec_json(const nn::LttBlockSpec& spec);
nn::LttBlockSpec spec_from(const Json& doc);

Json affine_json(const data::TargetAffine& affine);
data::TargetAffine affine_from(const Json& doc);

}  // namespace ttr::serde
