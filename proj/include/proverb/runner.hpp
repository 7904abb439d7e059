#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proverb/config.hpp"
#include "proverb/corpus.hpp"
#include "proverb/judging.hpp"
#include "proverb/llm_client.hpp"
#include "proverb/metrics.hpp"
#include "proverb/prompting.hpp"
#include "proverb/templates.hpp"
#include "proverb/vecindex.hpp"

namespace proverb {

// One row of the method comparison table. Accuracy and depth are absent when
// no item of the strategy received a verdict; bertscore when scoring was skipped.
struct MethodReport {
    Strategy strategy = Strategy::ZeroShot;
    std::optional<double> accuracy;
    std::optional<double> cultural_depth;
    double bleu = 0.0;
    std::optional<double> bertscore;
    size_t n_items = 0;
    size_t missing_verdicts = 0;
    size_t failed_generations = 0;
};

nlohmann::ordered_json to_json(const MethodReport& r);

// Markdown table with columns Method | Accuracy | Cultural Depth | BLEU | BERTScore,
// rows in kAllStrategies order, two decimals.
std::string render_markdown(std::span<const MethodReport> reports);

struct AblationRow {
    std::string label;
    Strategy baseline = Strategy::RagFewShot;
    double cg_accuracy = 0.0, baseline_accuracy = 0.0, delta_accuracy = 0.0;
    double cg_depth = 0.0, baseline_depth = 0.0, delta_depth = 0.0;
    double cg_bleu = 0.0, baseline_bleu = 0.0, delta_bleu = 0.0;
};

// CG-CoT against RAG Few-Shot (adds reasoning) and against Zero-Shot-CoT (adds
// retrieval). Deltas are CG-CoT minus baseline. Throws MissingStrategy.
std::vector<AblationRow> ablation_report(std::span<const MethodReport> reports);
std::string render_ablation_markdown(std::span<const AblationRow> rows);
nlohmann::ordered_json to_json(const AblationRow& row);

struct ReplicationFinding {
    std::string claim;
    double observed_delta = 0.0;
    double reference_delta = 0.0;
    bool holds = false;
};

// Directional checks for live runs: CG-CoT depth above Zero-Shot-CoT, and
// CG-CoT accuracy above Zero-Shot. Throws MissingStrategy.
std::vector<ReplicationFinding> replication_check(std::span<const MethodReport> reports);
std::string render_replication(std::span<const ReplicationFinding> findings);

// Means across judges per item, then across items; missing verdicts excluded.
std::vector<MethodReport> aggregate_reports(std::span<const Strategy> strategies,
                                            std::span<const GenerationRecord> generations,
                                            std::span<const JudgeVerdict> verdicts,
                                            std::span<const MissingVerdict> missing,
                                            const std::map<Strategy, BleuReport>& bleu,
                                            const std::map<Strategy, double>& bertscore,
                                            const std::map<Strategy, size_t>& failed_generations);

struct FailedGeneration {
    std::string proverb_id;
    Strategy strategy = Strategy::ZeroShot;
    std::string reason;
};

// Providers injected in place of the configured ones, keyed by judge tag.
struct ProviderOverrides {
    std::shared_ptr<CompletionProvider> llm;
    std::map<std::string, std::shared_ptr<CompletionProvider>> judges;
};

struct PreparedRun {
    RunConfig config;
    Corpus corpus;
    Corpus test;
    Corpus dev;
    Corpus retrieval;
    TemplateSet templates;
    std::optional<VectorIndex> index;
};

// Loads and validates corpus, templates and (when a retrieval strategy is
// requested) the index, building it when no index file is configured.
PreparedRun prepare_run(const RunConfig& config);

// One bundle per (strategy, test proverb), strategy-major in report order.
std::vector<PromptBundle> build_prompts(const PreparedRun& run);

struct RunSummary {
    std::filesystem::path run_dir;
    std::vector<MethodReport> reports;
    std::vector<GenerationRecord> generations;
    std::vector<FailedGeneration> failed_generations;
    JudgeOutcome judging;
    ClientStats llm_stats;
    std::vector<ClientStats> judge_stats;
    size_t prompts_written = 0;

    size_t provider_calls() const;
};

// Generates, judges, scores and writes everything under runs/<run_id>/.
// Per-item provider failures are tolerated up to config.max_missing_fraction.
RunSummary run_experiment(const RunConfig& config, const ProviderOverrides& overrides = {});

// Judges a run's persisted generations and rewrites verdicts and reports.
RunSummary judge_run(const RunConfig& config, const ProviderOverrides& overrides = {});

// Recomputes reports from a run's persisted generations and verdicts.
RunSummary report_run(const RunConfig& config);

}  // namespace proverb
