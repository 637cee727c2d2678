#pragma once

#include <string>
#include <string_view>

#include "ttr/nn/model.hpp"

namespace ttr::nn {

// Versioned JSON snapshot of a model. Serialized numbers use the shortest
// form that parses back to the identical double, so a load/save cycle is
// byte-stable and parameters round-trip bit for bit.
std::string checkpoint_to_json(const TTnetModel& model);
TTnetModel checkpoint_from_json(std::string_view text,
                                const std::string& origin = "<memory>");

void save_checkpoint(const TTnetModel& model, const std::string& path);
TTnetModel load_checkpoint(const std::string& path);

}  // namespace ttr::nn
