#include "skt/norms.hpp"

#include <algorithm>

#include "skt/errors.hpp"
#include "skt/json_io.hpp"

namespace skt::norms {

namespace {

const std::array<IqBand, 3> kIqBands = {IqBand::Below90, IqBand::Band90to110,
                                        IqBand::Above110};

std::string band_str(const AgeBand& b) {
  return std::to_string(b.min_years) + "-" + std::to_string(b.max_years);
}

}  // namespace

NormTable NormTable::from_json_file(const std::string& path) {
  return from_json(io::load_json_file(path), path);
}

NormTable NormTable::from_json(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_object()) throw ValidationError(origin + ": norm table must be an object");
  NormTable t;
  t.name_ = j.contains("name") ? j["name"].get<std::string>() : origin;
  t.example_only_ = j.contains("example_only") && j["example_only"].get<bool>();

  const auto& bands = io::require_field(j, "age_bands", origin);
  if (!bands.is_array() || bands.empty())
    throw ValidationError(origin + ": \"age_bands\" must be a non-empty array");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    std::string where = origin + ".age_bands[" + std::to_string(i) + "]";
    const auto& b = bands[i];
    AgeBand band;
    band.min_years = static_cast<int>(io::require_number(b, "min_years", where));
    band.max_years = static_cast<int>(io::require_number(b, "max_years", where));
    if (band.min_years > band.max_years)
      throw ValidationError(where + ": min_years > max_years");
    if (!t.age_bands_.empty() && band.min_years <= t.age_bands_.back().max_years)
      throw ValidationError(where + ": age bands must be sorted and non-overlapping");
    t.age_bands_.push_back(band);
  }

  const auto& cutoffs = io::require_field(j, "cutoffs", origin);
  if (!cutoffs.is_object()) throw ValidationError(origin + ": \"cutoffs\" must be an object");
  for (SubtestId sid : kAllSubtests) {
    std::string sname = subtest_name(sid);
    if (!cutoffs.contains(sname))
      throw ValidationError(origin + ": cutoffs missing subtest " + sname);
    const auto& per_age = cutoffs[sname];
    if (!per_age.is_array() || per_age.size() != t.age_bands_.size())
      throw ValidationError(origin + ": cutoffs." + sname + " must have one entry per age band (" +
                            std::to_string(t.age_bands_.size()) + ")");
    std::vector<std::map<IqBand, CutoffTriple>> rows;
    for (std::size_t a = 0; a < per_age.size(); ++a) {
      const auto& cell_row = per_age[a];
      std::string where = origin + ".cutoffs." + sname + "[" + std::to_string(a) + "]";
      if (!cell_row.is_object()) throw ValidationError(where + ": must be an object");
      std::map<IqBand, CutoffTriple> row;
      for (IqBand iq : kIqBands) {
        std::string key = iq_band_name(iq);
        if (!cell_row.contains(key))
          throw ValidationError(where + ": missing iq band \"" + key + "\"");
        const auto& triple = cell_row[key];
        if (!triple.is_array() || triple.size() != 3)
          throw ValidationError(where + "." + key + ": must be an array of three cutoffs");
        CutoffTriple c;
        c.c1 = triple[0].get<double>();
        c.c2 = triple[1].get<double>();
        c.c3 = triple[2].get<double>();
        if (!(c.c1 <= c.c2 && c.c2 <= c.c3))
          throw ValidationError(where + "." + key + ": cutoffs must be non-decreasing");
        row[iq] = c;
      }
      rows.push_back(std::move(row));
    }
    t.cells_[sid] = std::move(rows);
  }
  return t;
}

std::size_t NormTable::age_band_index(int age_years) const {
  for (std::size_t i = 0; i < age_bands_.size(); ++i) {
    if (age_years >= age_bands_[i].min_years && age_years <= age_bands_[i].max_years)
      return i;
  }
  throw NormCellError("no age band covers age " + std::to_string(age_years) +
                      " in norm table \"" + name_ + "\"");
}

const CutoffTriple& NormTable::cell(SubtestId subtest, std::size_t age_band, IqBand iq) const {
  auto it = cells_.find(subtest);
  if (it == cells_.end() || age_band >= it->second.size())
    throw NormCellError("norm table \"" + name_ + "\" has no cell for " +
                        subtest_name(subtest) + ", age band " + std::to_string(age_band));
  auto iq_it = it->second[age_band].find(iq);
  if (iq_it == it->second[age_band].end())
    throw NormCellError("norm table \"" + name_ + "\" has no cell for " +
                        subtest_name(subtest) + ", age band " +
                        band_str(age_bands_[age_band]) + ", iq " + iq_band_name(iq));
  return iq_it->second;
}

int raw_to_norm(const scoring::RawScore& raw, const SubjectMeta& meta, const NormTable& table) {
  std::size_t band = table.age_band_index(meta.age_years);
  const CutoffTriple& c = table.cell(raw.subtest, band, meta.iq_band);
  if (raw.value <= c.c1) return 0;
  if (raw.value <= c.c2) return 1;
  if (raw.value <= c.c3) return 2;
  return 3;
}

Severity classify_total(int total) {
  if (total < 0 || total > 27)
    throw ValidationError("classify_total: total " + std::to_string(total) +
                          " outside [0,27]");
  if (total <= 4) return Severity::NCI;
  if (total <= 8) return Severity::MCI;
  if (total <= 13) return Severity::MildDementia;
  if (total <= 18) return Severity::ModerateDementia;
  if (total <= 23) return Severity::SevereDementia;
  return Severity::VerySevereDementia;
}

std::string severity_name(Severity severity) {
  switch (severity) {
    case Severity::NCI: return "nci";
    case Severity::MCI: return "mci";
    case Severity::MildDementia: return "mild_dementia";
    case Severity::ModerateDementia: return "moderate_dementia";
    case Severity::SevereDementia: return "severe_dementia";
    case Severity::VerySevereDementia: return "very_severe_dementia";
  }
  return "nci";
}

SktResult assemble_result(const std::string& subject_id, const SubjectMeta& meta,
                          const std::map<SubtestId, scoring::RawScore>& raws,
                          const NormTable& table) {
  if (raws.empty()) throw ValidationError("assemble_result: no raw scores");
  SktResult result;
  result.subject_id = subject_id;
  for (const auto& [sid, raw] : raws) {
    if (raw.subtest != sid)
      throw ValidationError("assemble_result: raw score subtest mismatch for " +
                            subtest_name(sid));
    int norm = raw_to_norm(raw, meta, table);
    result.norm_scores[sid] = norm;
    result.total += norm;
    if (is_memory_subtest(sid)) result.memory_sum += norm;
    if (is_attention_subtest(sid)) result.attention_sum += norm;
  }
  result.severity = classify_total(result.total);
  result.partial = result.norm_scores.size() < 9;
  return result;
}

nlohmann::json to_json(const SktResult& result) {
  nlohmann::json j;
  j["subject_id"] = result.subject_id;
  nlohmann::json norms = nlohmann::json::object();
  for (const auto& [sid, v] : result.norm_scores) norms[subtest_name(sid)] = v;
  j["norm_scores"] = std::move(norms);
  j["total"] = result.total;
  j["severity"] = severity_name(result.severity);
  j["partial"] = result.partial;
  j["memory_sum"] = result.memory_sum;
  j["attention_sum"] = result.attention_sum;
  return j;
}

}  // namespace skt::norms
