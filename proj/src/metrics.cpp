#include "skt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "skt/errors.hpp"
#include "skt/textutil.hpp"

namespace skt::metrics {

double AlignmentCounts::wer() const {
  return static_cast<double>(errors()) / static_cast<double>(ref_len);
}

double AlignmentCounts::wc() const {
  return static_cast<double>(hits) / static_cast<double>(ref_len);
}

AlignmentCounts align_words(const std::vector<std::string>& ref,
                            const std::vector<std::string>& hyp) {
  if (ref.empty()) throw ValidationError("align_words: reference empty, WER undefined");

  const std::size_t R = ref.size();
  const std::size_t H = hyp.size();

  // DP over (cost, -hits): minimize cost, then maximize hits. Both are
  // additive along an alignment path, so the lexicographic order has optimal
  // substructure.
  struct Cell {
    int cost;
    int hits;
  };
  auto better = [](const Cell& a, const Cell& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.hits > b.hits);
  };

  std::vector<Cell> prev(H + 1), cur(H + 1);
  for (std::size_t j = 0; j <= H; ++j) prev[j] = {static_cast<int>(j), 0};
  for (std::size_t i = 1; i <= R; ++i) {
    cur[0] = {static_cast<int>(i), 0};
    for (std::size_t j = 1; j <= H; ++j) {
      bool eq = ref[i - 1] == hyp[j - 1];
      Cell diag{prev[j - 1].cost + (eq ? 0 : 1), prev[j - 1].hits + (eq ? 1 : 0)};
      Cell del{prev[j].cost + 1, prev[j].hits};
      Cell ins{cur[j - 1].cost + 1, cur[j - 1].hits};
      Cell best = diag;
      if (better(del, best)) best = del;
      if (better(ins, best)) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }

  const Cell final = prev[H];
  AlignmentCounts counts;
  counts.ref_len = static_cast<int>(R);
  counts.hits = final.hits;
  // cost = S + D + I, hits + S + D = R, hits + S + I = H
  // => S = R + H - 2*hits - cost.
  counts.substitutions = static_cast<int>(R + H) - 2 * final.hits - final.cost;
  counts.deletions = static_cast<int>(R) - final.hits - counts.substitutions;
  counts.insertions = static_cast<int>(H) - final.hits - counts.substitutions;
  return counts;
}

std::vector<std::string> tokenize_for_wer(std::string_view transcript_text) {
  return text::split_words(transcript_text);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("pearson: undefined correlation for constant input");
  double r = sxy / std::sqrt(sxx * syy);
  return std::max(-1.0, std::min(1.0, r));
}

std::string group_name(Group group) {
  switch (group) {
    case Group::NCI: return "NCI";
    case Group::MCI: return "MCI";
    case Group::DEM: return "DEM";
    case Group::All: return "All";
  }
  return "All";
}

std::optional<Group> group_from_name(std::string_view name) {
  if (name == "NCI" || name == "nci") return Group::NCI;
  if (name == "MCI" || name == "mci") return Group::MCI;
  if (name == "DEM" || name == "dem") return Group::DEM;
  if (name == "All" || name == "all") return Group::All;
  return std::nullopt;
}

Group group_of_total(int expert_total) {
  if (expert_total < 0 || expert_total > 27)
    throw ValidationError("group_of_total: total outside [0,27]");
  if (expert_total <= 4) return Group::NCI;
  if (expert_total <= 8) return Group::MCI;
  return Group::DEM;
}

namespace {

struct Accumulator {
  std::vector<double> gt_auto, gt_expert;
  std::vector<double> asr_auto, asr_expert;
  long wer_errors = 0;
  long wer_hits = 0;
  long wer_ref = 0;
  std::set<std::string> subjects;
};

void accumulate(Accumulator& acc, const EvalRow& row, std::vector<std::string>& warnings,
                const std::string& scope) {
  acc.subjects.insert(row.subject);
  if (row.expert_raw) {
    if (row.source == Source::GroundTruth) {
      acc.gt_auto.push_back(row.auto_raw);
      acc.gt_expert.push_back(*row.expert_raw);
    } else {
      acc.asr_auto.push_back(row.auto_raw);
      acc.asr_expert.push_back(*row.expert_raw);
    }
  }
  if (!row.ref_words.empty() && !row.hyp_words.empty()) {
    AlignmentCounts c = align_words(row.ref_words, row.hyp_words);
    acc.wer_errors += c.errors();
    acc.wer_hits += c.hits;
    acc.wer_ref += c.ref_len;
  } else if (!row.ref_words.empty() || !row.hyp_words.empty()) {
    warnings.push_back(scope + ": word lists present on only one side for subject " +
                       row.subject + ", skipped in WER");
  }
}

std::optional<double> safe_pearson(const std::vector<double>& a, const std::vector<double>& b,
                                   std::vector<std::string>& warnings,
                                   const std::string& scope) {
  if (a.size() < 2) return std::nullopt;
  try {
    return pearson(a, b);
  } catch (const ValidationError&) {
    warnings.push_back(scope + ": correlation undefined (constant values)");
    return std::nullopt;
  }
}

SubtestStats finalize(const Accumulator& acc, std::vector<std::string>& warnings,
                      const std::string& scope) {
  SubtestStats stats;
  stats.n = static_cast<int>(acc.subjects.size());
  stats.pearson_gt = safe_pearson(acc.gt_auto, acc.gt_expert, warnings, scope + " (gt)");
  stats.pearson_asr = safe_pearson(acc.asr_auto, acc.asr_expert, warnings, scope + " (asr)");
  if (acc.wer_ref > 0) {
    stats.wer = static_cast<double>(acc.wer_errors) / static_cast<double>(acc.wer_ref);
    stats.wc = static_cast<double>(acc.wer_hits) / static_cast<double>(acc.wer_ref);
  }
  return stats;
}

}  // namespace

ReportBundle subgroup_report(const std::vector<EvalRow>& rows,
                             const std::map<std::string, Group>& grouping) {
  ReportBundle bundle;
  if (rows.empty()) return bundle;

  const std::array<Group, 4> order = {Group::NCI, Group::MCI, Group::DEM, Group::All};
  for (Group g : order) {
    std::vector<const EvalRow*> in_group;
    std::set<std::string> subjects;
    for (const EvalRow& row : rows) {
      Group rg = Group::All;
      auto it = grouping.find(row.subject);
      if (it != grouping.end()) rg = it->second;
      if (g == Group::All || rg == g) {
        in_group.push_back(&row);
        subjects.insert(row.subject);
      }
    }
    if (in_group.empty()) continue;
    if (subjects.size() < 2) {
      bundle.warnings.push_back("group " + group_name(g) + " has fewer than 2 subjects, omitted");
      continue;
    }

    GroupReport report;
    report.group = g;
    report.n = static_cast<int>(subjects.size());

    std::map<SubtestId, Accumulator> per_subtest;
    Accumulator overall;
    for (const EvalRow* row : in_group) {
      std::string scope = group_name(g) + "/" + subtest_name(row->subtest);
      accumulate(per_subtest[row->subtest], *row, bundle.warnings, scope);
      accumulate(overall, *row, bundle.warnings, group_name(g) + "/overall");
    }
    for (const auto& [sid, acc] : per_subtest) {
      report.per_subtest[sid] =
          finalize(acc, bundle.warnings, group_name(g) + "/" + subtest_name(sid));
    }
    report.overall = finalize(overall, bundle.warnings, group_name(g) + "/overall");
    bundle.reports.push_back(std::move(report));
  }
  return bundle;
}

namespace {

std::string fmt(std::optional<double> v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

void emit_rows(const ReportBundle& bundle,
               const std::function<void(const std::string&, const std::string&, int,
                                        const SubtestStats&)>& emit) {
  for (const GroupReport& r : bundle.reports) {
    for (const auto& [sid, stats] : r.per_subtest)
      emit(group_name(r.group), subtest_name(sid), stats.n, stats);
    emit(group_name(r.group), "overall", r.overall.n, r.overall);
  }
}

}  // namespace

std::string report_csv(const ReportBundle& bundle) {
  std::ostringstream out;
  out << "group,subtest,n,pearson_gt,pearson_asr,wer,wc\n";
  emit_rows(bundle, [&](const std::string& g, const std::string& s, int n,
                        const SubtestStats& stats) {
    out << g << ',' << s << ',' << n << ',' << fmt(stats.pearson_gt) << ','
        << fmt(stats.pearson_asr) << ',' << fmt(stats.wer) << ',' << fmt(stats.wc) << '\n';
  });
  return out.str();
}

std::string report_markdown(const ReportBundle& bundle) {
  std::ostringstream out;
  out << "| Group | Subtest | n | Pearson (GT) | Pearson (ASR) | WER | WC |\n";
  out << "|---|---|---|---|---|---|---|\n";
  emit_rows(bundle, [&](const std::string& g, const std::string& s, int n,
                        const SubtestStats& stats) {
    auto cell = [](const std::string& v) { return v.empty() ? std::string("-") : v; };
    out << "| " << g << " | " << s << " | " << n << " | " << cell(fmt(stats.pearson_gt))
        << " | " << cell(fmt(stats.pearson_asr)) << " | " << cell(fmt(stats.wer)) << " | "
        << cell(fmt(stats.wc)) << " |\n";
  });
  return out.str();
}

nlohmann::json report_json(const ReportBundle& bundle) {
  nlohmann::json j;
  j["reports"] = nlohmann::json::array();
  for (const GroupReport& r : bundle.reports) {
    nlohmann::json g;
    g["group"] = group_name(r.group);
    g["n"] = r.n;
    auto stats_json = [](const SubtestStats& s) {
      nlohmann::json out;
      out["n"] = s.n;
      if (s.pearson_gt) out["pearson_gt"] = *s.pearson_gt;
      if (s.pearson_asr) out["pearson_asr"] = *s.pearson_asr;
      if (s.wer) out["wer"] = *s.wer;
      if (s.wc) out["wc"] = *s.wc;
      return out;
    };
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [sid, stats] : r.per_subtest) per[subtest_name(sid)] = stats_json(stats);
    g["per_subtest"] = std::move(per);
    g["overall"] = stats_json(r.overall);
    j["reports"].push_back(std::move(g));
  }
  j["warnings"] = bundle.warnings;
  return j;
}

}  // namespace skt::metrics
