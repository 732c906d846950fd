#pragma once

#include <filesystem>

#include <json.hpp>

#include "hsf/hs.hpp"

namespace hsf::io {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

Json to_json(const learners::LearnerSpec& spec);
learners::LearnerSpec spec_from_json(const Json& j);

Json to_json(const learners::TrainedLearner& learner);
learners::TrainedLearner learner_from_json(const Json& j);

Json to_json(const features::Standardizer& s);
features::Standardizer standardizer_from_json(const Json& j);

/// Standalone MMFF document with its own bank.
Json to_json(const mmff::MmffModel& model);
mmff::MmffModel mmff_from_json(const Json& j);

/// Slot variants sharing a bank serialize it once.
Json to_json(const hs::HsForecastSystem& system);
hs::HsForecastSystem system_from_json(const Json& j);

Json to_json(const hs::AllInOneGroup& group);
hs::AllInOneGroup group_from_json(const Json& j);

/// Writes pretty-printed JSON; IoFailure on failure.
void write_json(const std::filesystem::path& path, const Json& j);
/// ModelNotFound when the file is absent, FormatError when it does not parse.
Json read_json(const std::filesystem::path& path);

} // namespace hsf::io
