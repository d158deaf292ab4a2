#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ucc/editscript.hpp"
#include "ucc/pipeline.hpp"
#include "ucc/textmetrics.hpp"

namespace ucc {

/// Expert ground truth for one use case. The change list is required when
/// relevant == yes; the two labels exist only for use cases that actually
/// received a modification.
struct AnnotationRecord {
    std::string use_case_id;
    Answer relevant = Answer::No;
    std::optional<ChangeList> ground_truth_change_list;
    std::optional<bool> non_violative;
    std::optional<bool> self_consistent;
};

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& jsonl_path);
detail::ojson annotation_to_json(const AnnotationRecord& rec);

struct SelectionAccuracy {
    SelectionMode mode = SelectionMode::YesNo;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t flagged = 0; // predictions answered yes
    double accuracy = 0.0;
};

struct InstanceScores {
    std::string use_case_id;
    bool non_violative = false;
    bool self_consistent = false;
    double bleu = 0.0;
    RougeScore rouge1;
    RougeScore rougeL;
};

struct GroupScores {
    bool non_violative = false;
    bool self_consistent = false;
    std::size_t count = 0;
    double bleu = 0.0;
    RougeScore rouge1;
    RougeScore rougeL;
};

struct Exclusion {
    std::string use_case_id;
    std::string reason;
};

struct EvalReport {
    std::vector<SelectionAccuracy> selection;
    std::size_t modification_total = 0;
    std::size_t non_violative_count = 0;
    std::size_t self_consistent_count = 0;
    std::vector<GroupScores> groups; // fixed (nv, sc) enumeration order, non-empty only
    std::vector<InstanceScores> instances;
    std::vector<Exclusion> exclusions;
};

/// Plain accuracy: correct / total, where correct means the prediction equals
/// the annotation's relevance label. Throws on a missing annotation or a
/// duplicate id; an empty prediction list scores 0.
double selection_accuracy(const std::vector<SelectionResult>& predictions,
                          const std::vector<AnnotationRecord>& annotations);

SelectionAccuracy score_selection(const std::vector<SelectionResult>& predictions,
                                  const std::vector<AnnotationRecord>& annotations,
                                  SelectionMode mode);

/// Scores every modification against its annotated ground-truth change list
/// (both canonicalized and serialized before BLEU/ROUGE), grouped by the
/// (non_violative, self_consistent) labels. Instances with annotation gaps go
/// to the exclusions list, never silently dropped.
EvalReport similarity_report(const PipelineRun& run,
                             const std::vector<AnnotationRecord>& annotations);

/// Accuracy rows from every run in order; similarity from every run that
/// carries modifications.
EvalReport evaluate_runs(const std::vector<PipelineRun>& runs,
                         const std::vector<AnnotationRecord>& annotations);

detail::ojson eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const detail::ojson& j);

/// Plain-text tables: selection results, then similarity scores keyed by the
/// two labels, then exclusions.
std::string render_text_report(const EvalReport& report);

const char* technique_label(SelectionMode mode);

} // namespace ucc
