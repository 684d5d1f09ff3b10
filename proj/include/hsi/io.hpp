#pragma once

#include "hsi/boosting.hpp"
#include "hsi/direction.hpp"
#include "hsi/instance.hpp"
#include "hsi/moments.hpp"
#include "hsi/weak_learner.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace hsi {

using json = nlohmann::json;

// One {"x": [...], "y": +-1} record per line.
void write_dataset_jsonl(std::ostream& os, const LabeledDataset& ds);
LabeledDataset read_dataset_jsonl(std::istream& is, double gamma);
LabeledDataset load_dataset(const std::string& path, double gamma);
void save_dataset(const std::string& path, const LabeledDataset& ds);

json to_json(const Vec& v);
json to_json(const Mat& m);
json to_json(const Tensor3& t);
Vec vec_from_json(const json& j);

json concept_to_json(const TargetConcept& c);
// Validates parameters and frame orthonormality.
TargetConcept concept_from_json(const json& j);
TargetConcept load_concept(const std::string& path);

json hypothesis_to_json(const BandPTFHypothesis& h);
BandPTFHypothesis hypothesis_from_json(const json& j);
json ensemble_to_json(const EnsembleHypothesis& e);
EnsembleHypothesis ensemble_from_json(const json& j);

json moment_summary_to_json(const MomentSummary& s);
json candidate_to_json(const DirectionCandidate& c);
json boost_record_to_json(const BoostRecord& r);
// Everything except the model itself.
json learn_result_to_json(const LearnResult& r);

json pipeline_config_to_json(const PipelineConfig& c);
// Fields absent from `j` keep their values from `base`.
PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig base = {});

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace hsi
