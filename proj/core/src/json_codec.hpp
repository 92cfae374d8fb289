#pragma once

#include <json.hpp>

#include "msdhmm/msd_hmm.hpp"

namespace msdhmm::detail {

nlohmann::json hmm_to_json(const MsdHmm& model);
MsdHmm hmm_from_json(const nlohmann::json& doc);

}  // namespace msdhmm::detail
