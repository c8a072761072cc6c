#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skt/core.hpp"
#include "skt/scoring.hpp"

namespace skt::norms {

// Inclusive age interval a table cell applies to.
struct AgeBand {
  int min_years = 0;
  int max_years = 0;
};

// raw <= c1 -> 0, <= c2 -> 1, <= c3 -> 2, else 3. Higher raw always means
// more impairment (slower seconds, more omissions), so no direction flip
// exists anywhere in the table.
struct CutoffTriple {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

// Age x IQ-band x subtest cutoff table. The table file declares its own age
// intervals. Tables marked "example_only" carry invented values and must be
// explicitly allowed by the caller.
class NormTable {
 public:
  static NormTable from_json_file(const std::string& path);
  static NormTable from_json(const nlohmann::json& j, const std::string& origin);

  const std::vector<AgeBand>& age_bands() const { return age_bands_; }
  // Index of the band covering age_years; throws NormCellError if none does.
  std::size_t age_band_index(int age_years) const;
  const CutoffTriple& cell(SubtestId subtest, std::size_t age_band, IqBand iq) const;

  bool example_only() const { return example_only_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  bool example_only_ = false;
  std::vector<AgeBand> age_bands_;
  // cells_[subtest][age_band][iq]
  std::map<SubtestId, std::vector<std::map<IqBand, CutoffTriple>>> cells_;
};

int raw_to_norm(const scoring::RawScore& raw, const SubjectMeta& meta, const NormTable& table);

enum class Severity { NCI, MCI, MildDementia, ModerateDementia, SevereDementia,
                      VerySevereDementia };

// 0-4 NCI, 5-8 MCI, 9-13 mild, 14-18 moderate, 19-23 severe, 24-27 very
// severe dementia. Out-of-range totals are an error.
Severity classify_total(int total);
std::string severity_name(Severity severity);

struct SktResult {
  std::string subject_id;
  std::map<SubtestId, int> norm_scores;
  int total = 0;
  Severity severity = Severity::NCI;
  bool partial = false;   // true when fewer than all nine subtests are present
  int memory_sum = 0;     // S2 + S8 + S9 norm scores present
  int attention_sum = 0;  // S1 + S3 + S6 + S7 norm scores present
};

SktResult assemble_result(const std::string& subject_id, const SubjectMeta& meta,
                          const std::map<SubtestId, scoring::RawScore>& raws,
                          const NormTable& table);

nlohmann::json to_json(const SktResult& result);

}  // namespace skt::norms
