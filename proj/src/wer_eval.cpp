#include "gecrag/wer_eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gecrag/errors.hpp"
#include "gecrag/tfidf_index.hpp"

namespace gecrag {

namespace {

// DP cost: (total edits, substitutions), compared lexicographically. Both
// components are additive, so lexicographic order is preserved under
// addition and the usual Bellman recursion stays valid.
struct Cost {
    uint32_t edits;
    uint32_t subs;

    bool operator<(const Cost& o) const {
        return edits != o.edits ? edits < o.edits : subs < o.subs;
    }
};

} // namespace

AlignmentResult align(const std::vector<std::string>& ref_tokens,
                      const std::vector<std::string>& hyp_tokens) {
    const std::size_t n = ref_tokens.size();
    const std::size_t m = hyp_tokens.size();
    const std::size_t width = m + 1;

    std::vector<Cost> dp((n + 1) * width);
    auto at = [&](std::size_t i, std::size_t j) -> Cost& { return dp[i * width + j]; };

    at(0, 0) = {0, 0};
    for (std::size_t j = 1; j <= m; ++j) at(0, j) = {static_cast<uint32_t>(j), 0};
    for (std::size_t i = 1; i <= n; ++i) {
        at(i, 0) = {static_cast<uint32_t>(i), 0};
        for (std::size_t j = 1; j <= m; ++j) {
            const bool same = ref_tokens[i - 1] == hyp_tokens[j - 1];
            Cost best = at(i - 1, j - 1);
            if (!same) {
                best.edits += 1;
                best.subs += 1;
            }
            const Cost del{at(i - 1, j).edits + 1, at(i - 1, j).subs};
            const Cost ins{at(i, j - 1).edits + 1, at(i, j - 1).subs};
            if (del < best) best = del;
            if (ins < best) best = ins;
            at(i, j) = best;
        }
    }

    // Backtrack; at equal cost prefer match > substitution > deletion > insertion.
    AlignmentResult result;
    std::size_t i = n, j = m;
    std::vector<AlignmentStep> reversed;
    reversed.reserve(n + m);
    while (i > 0 || j > 0) {
        const Cost here = at(i, j);
        if (i > 0 && j > 0) {
            const bool same = ref_tokens[i - 1] == hyp_tokens[j - 1];
            Cost diag = at(i - 1, j - 1);
            if (!same) {
                diag.edits += 1;
                diag.subs += 1;
            }
            if (diag.edits == here.edits && diag.subs == here.subs) {
                reversed.push_back({same ? EditOp::match : EditOp::substitution,
                                    static_cast<int>(i - 1), static_cast<int>(j - 1)});
                if (!same) ++result.substitutions;
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && at(i - 1, j).edits + 1 == here.edits && at(i - 1, j).subs == here.subs) {
            reversed.push_back({EditOp::deletion, static_cast<int>(i - 1), -1});
            ++result.deletions;
            --i;
            continue;
        }
        reversed.push_back({EditOp::insertion, -1, static_cast<int>(j - 1)});
        ++result.insertions;
        --j;
    }
    result.trace.assign(reversed.rbegin(), reversed.rend());
    return result;
}

EvalReport score_corpus(const std::vector<ScoredPair>& pairs, const NormalizationConfig& cfg,
                        const std::string& condition) {
    if (pairs.empty()) throw DataError("cannot score an empty corpus");

    EvalReport report;
    report.condition = condition;
    report.utterances.reserve(pairs.size());
    for (const auto& pair : pairs) {
        const std::vector<std::string> ref = tokenize(normalize(pair.ref, cfg));
        if (ref.empty()) {
            throw DataError("reference for '" + pair.utt_id +
                            "' is empty after normalization; WER is undefined");
        }
        const std::vector<std::string> hyp = tokenize(normalize(pair.hyp, cfg));
        const AlignmentResult a = align(ref, hyp);

        UttScore score;
        score.utt_id = pair.utt_id;
        score.substitutions = a.substitutions;
        score.deletions = a.deletions;
        score.insertions = a.insertions;
        score.ref_len = ref.size();
        score.wer = static_cast<double>(a.total_edits()) / static_cast<double>(ref.size());
        report.total_substitutions += a.substitutions;
        report.total_deletions += a.deletions;
        report.total_insertions += a.insertions;
        report.total_ref_len += ref.size();
        report.utterances.push_back(std::move(score));
    }
    report.corpus_wer = static_cast<double>(report.total_substitutions + report.total_deletions +
                                            report.total_insertions) /
                        static_cast<double>(report.total_ref_len);
    return report;
}

std::vector<ComparisonRow> compare_conditions(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw DataError("compare_conditions needs at least one report");

    std::set<std::string> base_ids;
    for (const auto& u : reports.front().utterances) base_ids.insert(u.utt_id);
    for (std::size_t r = 1; r < reports.size(); ++r) {
        std::set<std::string> ids;
        for (const auto& u : reports[r].utterances) ids.insert(u.utt_id);
        if (ids != base_ids) {
            std::vector<std::string> diff;
            std::set_symmetric_difference(base_ids.begin(), base_ids.end(), ids.begin(),
                                          ids.end(), std::back_inserter(diff));
            std::ostringstream msg;
            msg << "report '" << reports[r].condition
                << "' covers a different utterance set than '" << reports.front().condition
                << "'; symmetric difference:";
            for (std::size_t i = 0; i < diff.size() && i < 10; ++i) msg << " " << diff[i];
            if (diff.size() > 10) msg << " ... (" << diff.size() << " total)";
            throw DataError(msg.str());
        }
    }

    std::vector<ComparisonRow> rows;
    rows.reserve(reports.size());
    const double baseline = reports.front().corpus_wer;
    for (std::size_t r = 0; r < reports.size(); ++r) {
        ComparisonRow row{reports[r].condition, reports[r].corpus_wer, std::nullopt};
        if (r > 0 && baseline > 0.0) {
            row.relative_reduction = (baseline - reports[r].corpus_wer) / baseline;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

std::string render_comparison_table(const std::vector<ComparisonRow>& rows) {
    const bool with_reduction = rows.size() > 1;
    std::ostringstream out;
    out << "condition                     WER%";
    if (with_reduction) out << "   reduction";
    out << "\n";
    for (const auto& row : rows) {
        std::string line = row.condition;
        if (line.size() < 24) line.append(24 - line.size(), ' ');
        std::string wer = fixed2(row.corpus_wer * 100.0);
        line += std::string(10 - std::min<std::size_t>(10, wer.size()), ' ') + wer;
        if (with_reduction) {
            std::string red = row.relative_reduction
                                  ? fixed2(*row.relative_reduction * 100.0) + "%"
                                  : std::string("-");
            line += std::string(12 - std::min<std::size_t>(12, red.size()), ' ') + red;
        }
        out << line << "\n";
    }
    return out.str();
}

namespace {

nlohmann::json report_json(const EvalReport& report) {
    nlohmann::json j;
    j["condition"] = report.condition;
    j["corpus_wer"] = report.corpus_wer;
    j["fallback_count"] = report.fallback_count;
    j["totals"] = {{"S", report.total_substitutions},
                   {"D", report.total_deletions},
                   {"I", report.total_insertions},
                   {"N", report.total_ref_len}};
    nlohmann::json utts = nlohmann::json::array();
    for (const auto& u : report.utterances) {
        utts.push_back({{"utt_id", u.utt_id},
                        {"S", u.substitutions},
                        {"D", u.deletions},
                        {"I", u.insertions},
                        {"N", u.ref_len},
                        {"wer", u.wer}});
    }
    j["utterances"] = std::move(utts);
    return j;
}

} // namespace

std::string report_to_json(const EvalReport& report) {
    return report_json(report).dump(2) + "\n";
}

std::string comparison_to_json(const std::vector<EvalReport>& reports,
                               const std::vector<ComparisonRow>& rows) {
    nlohmann::json j;
    nlohmann::json comparison = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json r;
        r["condition"] = row.condition;
        r["corpus_wer"] = row.corpus_wer;
        if (row.relative_reduction) {
            r["relative_reduction"] = *row.relative_reduction;
        } else {
            r["relative_reduction"] = nullptr;
        }
        comparison.push_back(std::move(r));
    }
    j["comparison"] = std::move(comparison);
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& rep : reports) reps.push_back(report_json(rep));
    j["reports"] = std::move(reps);
    return j.dump(2) + "\n";
}

} // namespace gecrag
