#include "ucc/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "ucc/corpus.hpp"
#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"

namespace ucc {

namespace {

double round4(double x) {
    return std::round(x * 10000.0) / 10000.0;
}

std::string fmt4(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    return buf;
}

std::string fmt_percent(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", x * 100.0);
    return buf;
}

std::unordered_map<std::string, const AnnotationRecord*> index_annotations(
    const std::vector<AnnotationRecord>& annotations) {
    std::unordered_map<std::string, const AnnotationRecord*> by_id;
    for (const auto& ann : annotations) {
        if (!by_id.emplace(ann.use_case_id, &ann).second) {
            throw EvalError(EvalErrorKind::DuplicateId,
                            "duplicate annotation id: " + ann.use_case_id);
        }
    }
    return by_id;
}

detail::ojson rouge_to_json(const RougeScore& r) {
    detail::ojson j = detail::ojson::object();
    j["precision"] = round4(r.precision);
    j["recall"] = round4(r.recall);
    j["f1"] = round4(r.f1);
    return j;
}

RougeScore rouge_from_json(const detail::ojson& j) {
    RougeScore r;
    r.precision = j.value("precision", 0.0);
    r.recall = j.value("recall", 0.0);
    r.f1 = j.value("f1", 0.0);
    return r;
}

} // namespace

const char* technique_label(SelectionMode mode) {
    return mode == SelectionMode::YesNo ? "Yes/No Prompting" : "CoT Prompting";
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& jsonl_path) {
    std::ifstream in(jsonl_path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read annotations file: " + jsonl_path.string());
    }
    std::vector<AnnotationRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        detail::ojson j = detail::ojson::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw ParseError(ParseErrorKind::MalformedJson,
                             "annotations line " + std::to_string(line_no) + ": malformed JSON");
        }
        AnnotationRecord rec;
        if (!j.contains("use_case_id") || !j.at("use_case_id").is_string()) {
            throw ParseError(ParseErrorKind::MissingKey,
                             "annotations line " + std::to_string(line_no) +
                                 ": missing \"use_case_id\"");
        }
        rec.use_case_id = j.at("use_case_id").get<std::string>();
        if (!j.contains("relevant") || !j.at("relevant").is_string()) {
            throw ParseError(ParseErrorKind::MissingKey,
                             "annotations line " + std::to_string(line_no) +
                                 ": missing \"relevant\"");
        }
        const std::string relevant = detail::to_lower_ascii(j.at("relevant").get<std::string>());
        if (relevant == "yes") {
            rec.relevant = Answer::Yes;
        } else if (relevant == "no") {
            rec.relevant = Answer::No;
        } else {
            throw ParseError(ParseErrorKind::WrongShape,
                             "annotations line " + std::to_string(line_no) +
                                 ": \"relevant\" must be yes or no");
        }
        if (j.contains("ground_truth_change_list")) {
            rec.ground_truth_change_list = change_list_from_json(j.at("ground_truth_change_list"));
        }
        if (rec.relevant == Answer::Yes && !rec.ground_truth_change_list) {
            throw ParseError(ParseErrorKind::MissingKey,
                             "annotations line " + std::to_string(line_no) +
                                 ": relevant use case needs a ground_truth_change_list");
        }
        if (j.contains("non_violative")) {
            if (!j.at("non_violative").is_boolean()) {
                throw ParseError(ParseErrorKind::WrongShape,
                                 "annotations: \"non_violative\" must be a boolean");
            }
            rec.non_violative = j.at("non_violative").get<bool>();
        }
        if (j.contains("self_consistent")) {
            if (!j.at("self_consistent").is_boolean()) {
                throw ParseError(ParseErrorKind::WrongShape,
                                 "annotations: \"self_consistent\" must be a boolean");
            }
            rec.self_consistent = j.at("self_consistent").get<bool>();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

detail::ojson annotation_to_json(const AnnotationRecord& rec) {
    detail::ojson j = detail::ojson::object();
    j["use_case_id"] = rec.use_case_id;
    j["relevant"] = rec.relevant == Answer::Yes ? "yes" : "no";
    if (rec.ground_truth_change_list) {
        j["ground_truth_change_list"] = change_list_to_json(*rec.ground_truth_change_list);
    }
    if (rec.non_violative) j["non_violative"] = *rec.non_violative;
    if (rec.self_consistent) j["self_consistent"] = *rec.self_consistent;
    return j;
}

namespace {

std::size_t count_correct(const std::vector<SelectionResult>& predictions,
                          const std::unordered_map<std::string, const AnnotationRecord*>& by_id) {
    std::unordered_set<std::string> seen;
    std::size_t correct = 0;
    for (const auto& pred : predictions) {
        if (!seen.insert(pred.use_case_id).second) {
            throw EvalError(EvalErrorKind::DuplicateId,
                            "duplicate prediction id: " + pred.use_case_id);
        }
        auto it = by_id.find(pred.use_case_id);
        if (it == by_id.end()) {
            throw EvalError(EvalErrorKind::MissingAnnotation,
                            "no annotation for use case: " + pred.use_case_id);
        }
        if (pred.answer == it->second->relevant) ++correct;
    }
    return correct;
}

} // namespace

double selection_accuracy(const std::vector<SelectionResult>& predictions,
                          const std::vector<AnnotationRecord>& annotations) {
    auto by_id = index_annotations(annotations);
    const std::size_t correct = count_correct(predictions, by_id);
    if (predictions.empty()) return 0.0;
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

SelectionAccuracy score_selection(const std::vector<SelectionResult>& predictions,
                                  const std::vector<AnnotationRecord>& annotations,
                                  SelectionMode mode) {
    auto by_id = index_annotations(annotations);
    SelectionAccuracy acc;
    acc.mode = mode;
    acc.total = predictions.size();
    acc.flagged = static_cast<std::size_t>(
        std::count_if(predictions.begin(), predictions.end(),
                      [](const SelectionResult& s) { return s.answer == Answer::Yes; }));
    acc.correct = count_correct(predictions, by_id);
    acc.accuracy = acc.total == 0 ? 0.0
                                  : static_cast<double>(acc.correct) /
                                        static_cast<double>(acc.total);
    return acc;
}

EvalReport similarity_report(const PipelineRun& run,
                             const std::vector<AnnotationRecord>& annotations) {
    return evaluate_runs({run}, annotations);
}

EvalReport evaluate_runs(const std::vector<PipelineRun>& runs,
                         const std::vector<AnnotationRecord>& annotations) {
    EvalReport report;
    auto by_id = index_annotations(annotations);

    for (const auto& run : runs) {
        report.selection.push_back(score_selection(run.selections, annotations,
                                                   run.selection_mode));
    }

    struct Accumulator {
        std::size_t count = 0;
        double bleu = 0.0;
        RougeScore rouge1;
        RougeScore rougeL;
    };
    Accumulator groups[2][2];

    for (const auto& run : runs) {
        for (const auto& mod : run.modifications) {
            ++report.modification_total;
            auto it = by_id.find(mod.use_case_id);
            if (it == by_id.end()) {
                report.exclusions.push_back({mod.use_case_id, "missing annotation"});
                continue;
            }
            const AnnotationRecord& ann = *it->second;
            if (ann.non_violative && *ann.non_violative) ++report.non_violative_count;
            if (ann.self_consistent && *ann.self_consistent) ++report.self_consistent_count;
            if (!ann.non_violative || !ann.self_consistent) {
                report.exclusions.push_back(
                    {mod.use_case_id, "missing non-violativity/self-consistency label"});
                continue;
            }
            if (!ann.ground_truth_change_list) {
                report.exclusions.push_back(
                    {mod.use_case_id, "missing ground-truth change list"});
                continue;
            }
            const TokenSequence cand =
                tokenize(serialize_change_list(canonicalize(mod.change_list)));
            const TokenSequence ref =
                tokenize(serialize_change_list(canonicalize(*ann.ground_truth_change_list)));
            InstanceScores inst;
            inst.use_case_id = mod.use_case_id;
            inst.non_violative = *ann.non_violative;
            inst.self_consistent = *ann.self_consistent;
            inst.bleu = bleu(cand, ref);
            inst.rouge1 = rouge1(cand, ref);
            inst.rougeL = rougeL(cand, ref);
            report.instances.push_back(inst);

            Accumulator& acc = groups[inst.non_violative ? 1 : 0][inst.self_consistent ? 1 : 0];
            ++acc.count;
            acc.bleu += inst.bleu;
            acc.rouge1.precision += inst.rouge1.precision;
            acc.rouge1.recall += inst.rouge1.recall;
            acc.rouge1.f1 += inst.rouge1.f1;
            acc.rougeL.precision += inst.rougeL.precision;
            acc.rougeL.recall += inst.rougeL.recall;
            acc.rougeL.f1 += inst.rougeL.f1;
        }
    }

    // Fixed enumeration order keeps reports byte-deterministic.
    for (auto [nv, sc] : {std::pair{true, true}, {true, false}, {false, true}, {false, false}}) {
        const Accumulator& acc = groups[nv ? 1 : 0][sc ? 1 : 0];
        if (acc.count == 0) continue;
        const double n = static_cast<double>(acc.count);
        GroupScores g;
        g.non_violative = nv;
        g.self_consistent = sc;
        g.count = acc.count;
        g.bleu = acc.bleu / n;
        g.rouge1 = {acc.rouge1.precision / n, acc.rouge1.recall / n, acc.rouge1.f1 / n};
        g.rougeL = {acc.rougeL.precision / n, acc.rougeL.recall / n, acc.rougeL.f1 / n};
        report.groups.push_back(g);
    }
    return report;
}

detail::ojson eval_report_to_json(const EvalReport& report) {
    detail::ojson j = detail::ojson::object();
    detail::ojson selection = detail::ojson::array();
    for (const auto& row : report.selection) {
        detail::ojson r = detail::ojson::object();
        r["technique"] = technique_label(row.mode);
        r["mode"] = to_string(row.mode);
        r["correct"] = row.correct;
        r["total"] = row.total;
        r["flagged"] = row.flagged;
        r["accuracy"] = round4(row.accuracy);
        selection.push_back(std::move(r));
    }
    j["selection"] = std::move(selection);

    detail::ojson modification = detail::ojson::object();
    modification["total"] = report.modification_total;
    modification["non_violative"] = report.non_violative_count;
    modification["self_consistent"] = report.self_consistent_count;
    detail::ojson groups = detail::ojson::array();
    for (const auto& g : report.groups) {
        detail::ojson row = detail::ojson::object();
        row["non_violative"] = g.non_violative;
        row["self_consistent"] = g.self_consistent;
        row["count"] = g.count;
        row["bleu"] = round4(g.bleu);
        row["rouge1"] = rouge_to_json(g.rouge1);
        row["rougeL"] = rouge_to_json(g.rougeL);
        groups.push_back(std::move(row));
    }
    modification["groups"] = std::move(groups);
    detail::ojson instances = detail::ojson::array();
    for (const auto& inst : report.instances) {
        detail::ojson row = detail::ojson::object();
        row["use_case_id"] = inst.use_case_id;
        row["non_violative"] = inst.non_violative;
        row["self_consistent"] = inst.self_consistent;
        row["bleu"] = round4(inst.bleu);
        row["rouge1"] = rouge_to_json(inst.rouge1);
        row["rougeL"] = rouge_to_json(inst.rougeL);
        instances.push_back(std::move(row));
    }
    modification["instances"] = std::move(instances);
    detail::ojson exclusions = detail::ojson::array();
    for (const auto& ex : report.exclusions) {
        detail::ojson row = detail::ojson::object();
        row["use_case_id"] = ex.use_case_id;
        row["reason"] = ex.reason;
        exclusions.push_back(std::move(row));
    }
    modification["exclusions"] = std::move(exclusions);
    j["modification"] = std::move(modification);
    return j;
}

EvalReport eval_report_from_json(const detail::ojson& j) {
    if (!j.is_object()) {
        throw ParseError(ParseErrorKind::WrongShape, "eval report: root must be an object");
    }
    EvalReport report;
    for (const auto& r : j.value("selection", detail::ojson::array())) {
        SelectionAccuracy row;
        auto mode = selection_mode_from_string(r.value("mode", ""));
        if (!mode) throw ParseError(ParseErrorKind::WrongShape, "eval report: bad selection mode");
        row.mode = *mode;
        row.correct = r.value("correct", 0U);
        row.total = r.value("total", 0U);
        row.flagged = r.value("flagged", 0U);
        row.accuracy = r.value("accuracy", 0.0);
        report.selection.push_back(row);
    }
    const auto& mod = j.value("modification", detail::ojson::object());
    report.modification_total = mod.value("total", 0U);
    report.non_violative_count = mod.value("non_violative", 0U);
    report.self_consistent_count = mod.value("self_consistent", 0U);
    for (const auto& g : mod.value("groups", detail::ojson::array())) {
        GroupScores row;
        row.non_violative = g.value("non_violative", false);
        row.self_consistent = g.value("self_consistent", false);
        row.count = g.value("count", 0U);
        row.bleu = g.value("bleu", 0.0);
        row.rouge1 = rouge_from_json(g.value("rouge1", detail::ojson::object()));
        row.rougeL = rouge_from_json(g.value("rougeL", detail::ojson::object()));
        report.groups.push_back(row);
    }
    for (const auto& inst : mod.value("instances", detail::ojson::array())) {
        InstanceScores row;
        row.use_case_id = inst.value("use_case_id", "");
        row.non_violative = inst.value("non_violative", false);
        row.self_consistent = inst.value("self_consistent", false);
        row.bleu = inst.value("bleu", 0.0);
        row.rouge1 = rouge_from_json(inst.value("rouge1", detail::ojson::object()));
        row.rougeL = rouge_from_json(inst.value("rougeL", detail::ojson::object()));
        report.instances.push_back(row);
    }
    for (const auto& ex : mod.value("exclusions", detail::ojson::array())) {
        report.exclusions.push_back({ex.value("use_case_id", ""), ex.value("reason", "")});
    }
    return report;
}

std::string render_text_report(const EvalReport& report) {
    std::string out;
    out += "Use Case Selection Results\n";
    out += "--------------------------\n";
    out += "Technique           Accuracy  Correct  Total  Flagged\n";
    for (const auto& row : report.selection) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-18s  %8s  %7zu  %5zu  %7zu\n",
                      technique_label(row.mode), fmt_percent(row.accuracy).c_str(), row.correct,
                      row.total, row.flagged);
        out += line;
    }
    out += "\nSimilarity Scores for Use Case Modification\n";
    out += "-------------------------------------------\n";
    out += "Non-violative  Self-Consistent  Count  BLEU    ROUGE-1  ROUGE-L\n";
    for (const auto& g : report.groups) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-13s  %-15s  %5zu  %s  %s   %s\n",
                      g.non_violative ? "yes" : "no", g.self_consistent ? "yes" : "no", g.count,
                      fmt4(g.bleu).c_str(), fmt4(g.rouge1.f1).c_str(), fmt4(g.rougeL.f1).c_str());
        out += line;
    }
    out += "\nModified: " + std::to_string(report.modification_total) +
           ", non-violative: " + std::to_string(report.non_violative_count) +
           ", self-consistent: " + std::to_string(report.self_consistent_count) + "\n";
    if (!report.exclusions.empty()) {
        out += "\nExclusions\n";
        out += "----------\n";
        for (const auto& ex : report.exclusions) {
            out += ex.use_case_id + "  " + ex.reason + "\n";
        }
    }
    return out;
}

const char* to_string(EvalErrorKind kind) {
    switch (kind) {
        case EvalErrorKind::MissingAnnotation: return "missing-annotation";
        case EvalErrorKind::DuplicateId: return "duplicate-id";
    }
    return "unknown";
}

} // namespace ucc
