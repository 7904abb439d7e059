#include "proverb/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"
#include "proverb/parallel.hpp"
#include "proverb/text.hpp"

namespace proverb {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string signed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.2f", v);
    return buf;
}

std::string fixed2(const std::optional<double>& v) { return v ? fixed2(*v) : "n/a"; }

size_t strategy_rank(Strategy s) { return static_cast<size_t>(s); }

const MethodReport& require(std::span<const MethodReport> reports, Strategy s) {
    for (const auto& r : reports) {
        if (r.strategy == s) return r;
    }
    throw Error(ErrorCode::MissingStrategy, std::string(strategy_name(s)));
}

double require_value(const std::optional<double>& v, Strategy s, const char* what) {
    if (!v) throw Error(ErrorCode::MissingStrategy, std::string(strategy_name(s)) + " has no " + what);
    return *v;
}

}  // namespace

ordered_json to_json(const MethodReport& r) {
    ordered_json j;
    j["strategy"] = std::string(strategy_name(r.strategy));
    j["method"] = std::string(strategy_label(r.strategy));
    j["accuracy"] = optional_number(r.accuracy);
    j["cultural_depth"] = optional_number(r.cultural_depth);
    j["bleu"] = r.bleu;
    j["bertscore"] = optional_number(r.bertscore);
    j["n_items"] = r.n_items;
    j["missing_verdicts"] = r.missing_verdicts;
    j["failed_generations"] = r.failed_generations;
    return j;
}

std::string render_markdown(std::span<const MethodReport> reports) {
    std::vector<MethodReport> rows(reports.begin(), reports.end());
    std::stable_sort(rows.begin(), rows.end(), [](const MethodReport& a, const MethodReport& b) {
        return strategy_rank(a.strategy) < strategy_rank(b.strategy);
    });
    std::string out = "| Method | Accuracy | Cultural Depth | BLEU | BERTScore |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + std::string(strategy_label(r.strategy)) + " | " + fixed2(r.accuracy) + " | " +
               fixed2(r.cultural_depth) + " | " + fixed2(r.bleu) + " | " + fixed2(r.bertscore) + " |\n";
    }
    return out;
}

std::vector<AblationRow> ablation_report(std::span<const MethodReport> reports) {
    const MethodReport& cg = require(reports, Strategy::CgCoT);
    std::vector<AblationRow> rows;
    for (Strategy baseline : {Strategy::RagFewShot, Strategy::ZeroShotCoT}) {
        const MethodReport& other = require(reports, baseline);
        AblationRow row;
        row.label = "CG-CoT vs. " + std::string(strategy_label(baseline));
        row.baseline = baseline;
        row.cg_accuracy = require_value(cg.accuracy, Strategy::CgCoT, "accuracy");
        row.baseline_accuracy = require_value(other.accuracy, baseline, "accuracy");
        row.delta_accuracy = row.cg_accuracy - row.baseline_accuracy;
        row.cg_depth = require_value(cg.cultural_depth, Strategy::CgCoT, "cultural depth");
        row.baseline_depth = require_value(other.cultural_depth, baseline, "cultural depth");
        row.delta_depth = row.cg_depth - row.baseline_depth;
        row.cg_bleu = cg.bleu;
        row.baseline_bleu = other.bleu;
        row.delta_bleu = cg.bleu - other.bleu;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_ablation_markdown(std::span<const AblationRow> rows) {
    std::string out = "| Comparison | Accuracy | Cultural Depth | BLEU |\n|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + r.label + " | " + fixed2(r.cg_accuracy) + " vs. " + fixed2(r.baseline_accuracy) + " (" +
               signed2(r.delta_accuracy) + ") | " + fixed2(r.cg_depth) + " vs. " + fixed2(r.baseline_depth) + " (" +
               signed2(r.delta_depth) + ") | " + fixed2(r.cg_bleu) + " vs. " + fixed2(r.baseline_bleu) + " (" +
               signed2(r.delta_bleu) + ") |\n";
    }
    return out;
}

ordered_json to_json(const AblationRow& r) {
    ordered_json j;
    j["comparison"] = r.label;
    j["baseline"] = std::string(strategy_name(r.baseline));
    j["accuracy"] = {{"cg_cot", r.cg_accuracy}, {"baseline", r.baseline_accuracy}, {"delta", r.delta_accuracy}};
    j["cultural_depth"] = {{"cg_cot", r.cg_depth}, {"baseline", r.baseline_depth}, {"delta", r.delta_depth}};
    j["bleu"] = {{"cg_cot", r.cg_bleu}, {"baseline", r.baseline_bleu}, {"delta", r.delta_bleu}};
    return j;
}

std::vector<ReplicationFinding> replication_check(std::span<const MethodReport> reports) {
    const MethodReport& cg = require(reports, Strategy::CgCoT);
    const MethodReport& zs_cot = require(reports, Strategy::ZeroShotCoT);
    const MethodReport& zs = require(reports, Strategy::ZeroShot);
    std::vector<ReplicationFinding> out;
    {
        ReplicationFinding f;
        f.claim = "CG-CoT cultural depth > Zero-Shot-CoT cultural depth";
        f.observed_delta = require_value(cg.cultural_depth, Strategy::CgCoT, "cultural depth") -
                           require_value(zs_cot.cultural_depth, Strategy::ZeroShotCoT, "cultural depth");
        f.reference_delta = 3.77 - 3.15;
        f.holds = f.observed_delta > 0.0;
        out.push_back(f);
    }
    {
        ReplicationFinding f;
        f.claim = "CG-CoT accuracy > Zero-Shot accuracy";
        f.observed_delta = require_value(cg.accuracy, Strategy::CgCoT, "accuracy") -
                           require_value(zs.accuracy, Strategy::ZeroShot, "accuracy");
        f.reference_delta = 0.65 - 0.56;
        f.holds = f.observed_delta > 0.0;
        out.push_back(f);
    }
    return out;
}

std::string render_replication(std::span<const ReplicationFinding> findings) {
    std::string out;
    for (const auto& f : findings) {
        out += (f.holds ? "holds     " : "DIVERGENT ") + f.claim + ": observed " + signed2(f.observed_delta) +
               ", reference " + signed2(f.reference_delta) + "\n";
    }
    return out;
}

std::vector<MethodReport> aggregate_reports(std::span<const Strategy> strategies,
                                            std::span<const GenerationRecord> generations,
                                            std::span<const JudgeVerdict> verdicts,
                                            std::span<const MissingVerdict> missing,
                                            const std::map<Strategy, BleuReport>& bleu,
                                            const std::map<Strategy, double>& bertscore,
                                            const std::map<Strategy, size_t>& failed_generations) {
    std::vector<Strategy> order(strategies.begin(), strategies.end());
    std::sort(order.begin(), order.end(), [](Strategy a, Strategy b) { return strategy_rank(a) < strategy_rank(b); });

    std::vector<MethodReport> out;
    for (Strategy s : order) {
        MethodReport r;
        r.strategy = s;
        std::vector<std::string> items;
        for (const auto& g : generations) {
            if (g.strategy == s) items.push_back(g.proverb_id);
        }
        std::sort(items.begin(), items.end());
        r.n_items = items.size();

        double acc_sum = 0.0, depth_sum = 0.0;
        size_t judged_items = 0;
        for (const auto& id : items) {
            double item_acc = 0.0, item_depth = 0.0;
            size_t count = 0;
            for (const auto& v : verdicts) {
                if (v.strategy != s || v.proverb_id != id) continue;
                item_acc += v.accuracy_score;
                item_depth += static_cast<double>(v.cultural_depth);
                ++count;
            }
            if (count == 0) continue;
            acc_sum += item_acc / static_cast<double>(count);
            depth_sum += item_depth / static_cast<double>(count);
            ++judged_items;
        }
        if (judged_items > 0) {
            r.accuracy = acc_sum / static_cast<double>(judged_items);
            r.cultural_depth = depth_sum / static_cast<double>(judged_items);
        }
        for (const auto& m : missing) {
            if (m.strategy == s) ++r.missing_verdicts;
        }
        if (auto it = bleu.find(s); it != bleu.end()) r.bleu = it->second.score;
        if (auto it = bertscore.find(s); it != bertscore.end()) r.bertscore = it->second;
        if (auto it = failed_generations.find(s); it != failed_generations.end()) r.failed_generations = it->second;
        out.push_back(r);
    }
    return out;
}

size_t RunSummary::provider_calls() const {
    size_t total = llm_stats.provider_calls;
    for (const auto& s : judge_stats) total += s.provider_calls;
    return total;
}

// ---------------------------------------------------------------------------
// Preparation

namespace {

bool needs_retrieval(const RunConfig& c) {
    return std::any_of(c.strategies.begin(), c.strategies.end(),
                       [](Strategy s) { return s == Strategy::RagFewShot || s == Strategy::CgCoT; });
}

bool needs_dev(const RunConfig& c) {
    return std::find(c.strategies.begin(), c.strategies.end(), Strategy::FewShot) != c.strategies.end();
}

}  // namespace

PreparedRun prepare_run(const RunConfig& config) {
    config.validate();
    std::set<Split> expected{Split::Test};
    if (needs_dev(config)) expected.insert(Split::Dev);
    if (needs_retrieval(config)) expected.insert(Split::Retrieval);

    PreparedRun run{config, load_corpus(config.corpus_path, expected), {}, {}, {}, TemplateSet::load(config.templates_dir),
                    std::nullopt};
    if (!config.allow_overlap) check_disjoint(run.corpus);
    run.test = filter_split(run.corpus, Split::Test);
    run.dev = filter_split(run.corpus, Split::Dev);
    run.retrieval = filter_split(run.corpus, Split::Retrieval);

    for (Strategy s : config.strategies) (void)run.templates.get(strategy_name(s));
    (void)run.templates.get(rubric_key(config.accuracy_scale));

    if (needs_retrieval(config)) {
        std::error_code ec;
        if (config.index_path && fs::exists(*config.index_path, ec)) {
            VectorIndex idx = load_index(*config.index_path);
            if (idx.corpus_checksum() != run.retrieval.checksum()) {
                throw Error(ErrorCode::StaleIndex, config.index_path->string() + " was built from a different corpus");
            }
            if (idx.provider_tag() != config.embed.provider_tag() || idx.dim() != config.embed.dim) {
                throw Error(ErrorCode::StaleIndex, config.index_path->string() + " was built with " +
                                                       idx.provider_tag() + " at dim " + std::to_string(idx.dim()));
            }
            run.index = std::move(idx);
        } else {
            run.index = build_index(run.retrieval, config.embed);
        }
    }
    return run;
}

std::vector<PromptBundle> build_prompts(const PreparedRun& run) {
    std::vector<Strategy> order = run.config.strategies;
    std::sort(order.begin(), order.end(), [](Strategy a, Strategy b) { return strategy_rank(a) < strategy_rank(b); });
    const RunConfig& c = run.config;
    std::vector<PromptBundle> out;
    for (Strategy s : order) {
        for (const Proverb& p : run.test) {
            switch (s) {
                case Strategy::ZeroShot: out.push_back(build_zero_shot(p, run.templates)); break;
                case Strategy::ZeroShotCoT: out.push_back(build_zero_shot_cot(p, run.templates)); break;
                case Strategy::FewShot: out.push_back(build_few_shot(p, run.dev, c.n, c.seed, run.templates)); break;
                case Strategy::RagFewShot:
                    out.push_back(build_rag_few_shot(p, *run.index, run.retrieval, c.embed, c.k, run.templates));
                    break;
                case Strategy::CgCoT:
                    out.push_back(build_cg_cot(p, *run.index, run.retrieval, c.embed, c.k, run.templates));
                    break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void write_jsonl(const fs::path& path, const std::vector<ordered_json>& rows) {
    std::string content;
    for (const auto& r : rows) content += r.dump() + "\n";
    write_file_atomic(path, content);
}

std::vector<json> read_jsonl(const fs::path& path) {
    const std::string content = read_file(path);
    std::vector<json> rows;
    size_t pos = 0, line_no = 0;
    while (pos < content.size()) {
        auto eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        const std::string_view line(content.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedRecord, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json stats_json(const ClientStats& s) {
    return {{"provider_calls", s.provider_calls},
            {"cache_hits", s.cache_hits},
            {"coalesced", s.coalesced},
            {"max_in_flight", s.max_in_flight}};
}

void sort_generations(std::vector<GenerationRecord>& gens) {
    std::sort(gens.begin(), gens.end(), [](const GenerationRecord& a, const GenerationRecord& b) {
        return std::tuple(strategy_rank(*a.strategy), a.proverb_id) < std::tuple(strategy_rank(*b.strategy), b.proverb_id);
    });
}

void persist_generations(const fs::path& dir, const std::vector<GenerationRecord>& gens,
                         const std::vector<FailedGeneration>& failures) {
    std::vector<ordered_json> rows;
    for (const auto& g : gens) rows.push_back(to_json(g));
    for (const auto& f : failures) {
        rows.push_back({{"failed", true},
                        {"proverb_id", f.proverb_id},
                        {"strategy", std::string(strategy_name(f.strategy))},
                        {"reason", f.reason}});
    }
    write_jsonl(dir / "generations.jsonl", rows);
}

void load_generations(const fs::path& dir, std::vector<GenerationRecord>& gens, std::vector<FailedGeneration>& failures) {
    const fs::path path = dir / "generations.jsonl";
    std::error_code ec;
    if (!fs::exists(path, ec)) throw Error(ErrorCode::IoError, "no generations recorded at " + path.string());
    for (const auto& row : read_jsonl(path)) {
        if (row.value("failed", false)) {
            auto s = parse_strategy(row.at("strategy").get<std::string>());
            if (!s) throw Error(ErrorCode::MalformedRecord, "unknown strategy in " + path.string());
            failures.push_back({row.at("proverb_id").get<std::string>(), *s, row.value("reason", "")});
        } else {
            GenerationRecord g = generation_from_json(row);
            if (!g.strategy) throw Error(ErrorCode::MalformedRecord, "generation without strategy in " + path.string());
            gens.push_back(std::move(g));
        }
    }
    sort_generations(gens);
}

void persist_verdicts(const fs::path& dir, const JudgeOutcome& outcome) {
    std::vector<ordered_json> rows;
    for (const auto& v : outcome.verdicts) rows.push_back(to_json(v));
    for (const auto& m : outcome.missing) {
        rows.push_back({{"missing", true},
                        {"proverb_id", m.proverb_id},
                        {"strategy", std::string(strategy_name(m.strategy))},
                        {"judge_tag", m.judge_tag},
                        {"reason", m.reason}});
    }
    write_jsonl(dir / "verdicts.jsonl", rows);
}

JudgeOutcome load_verdicts(const fs::path& dir, size_t expected) {
    const fs::path path = dir / "verdicts.jsonl";
    std::error_code ec;
    if (!fs::exists(path, ec)) throw Error(ErrorCode::IoError, "no verdicts recorded at " + path.string());
    JudgeOutcome out;
    out.expected = expected;
    for (const auto& row : read_jsonl(path)) {
        if (row.value("missing", false)) {
            auto s = parse_strategy(row.at("strategy").get<std::string>());
            if (!s) throw Error(ErrorCode::MalformedRecord, "unknown strategy in " + path.string());
            out.missing.push_back(
                {row.at("proverb_id").get<std::string>(), *s, row.at("judge_tag").get<std::string>(), row.value("reason", "")});
        } else {
            out.verdicts.push_back(verdict_from_json(row));
        }
    }
    return out;
}

void write_metadata(const RunConfig& c, const std::string& started, const RunSummary& summary, const std::string& phase) {
    ordered_json meta;
    meta["run_id"] = c.run_id;
    meta["phase"] = phase;
    meta["started_at"] = started;
    meta["finished_at"] = utc_now();
    meta["dry_run"] = c.dry_run;
    meta["prompts"] = summary.prompts_written;
    meta["generations"] = summary.generations.size();
    meta["failed_generations"] = summary.failed_generations.size();
    meta["verdicts"] = summary.judging.verdicts.size();
    meta["missing_verdicts"] = summary.judging.missing.size();
    meta["llm"] = stats_json(summary.llm_stats);
    meta["judges"] = ordered_json::array();
    for (const auto& s : summary.judge_stats) meta["judges"].push_back(stats_json(s));
    write_file_atomic(summary.run_dir / "metadata.json", meta.dump(2) + "\n");
}

void write_config_snapshot(const RunConfig& c) {
    if (!c.source_text.empty()) write_file_atomic(c.run_dir() / "config.toml", c.source_text);
    write_file_atomic(c.run_dir() / "config.json", to_json(c).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Phases

struct GenerationPhase {
    std::vector<GenerationRecord> records;
    std::vector<FailedGeneration> failures;
    ClientStats stats;
};

GenerationPhase generate(const RunConfig& c, std::span<const PromptBundle> prompts,
                         std::shared_ptr<CompletionProvider> provider, std::shared_ptr<const ResponseCache> cache) {
    if (!provider) provider = make_provider(c.llm);
    LlmClient client(c.llm, provider, cache);
    std::vector<std::optional<GenerationRecord>> slots(prompts.size());
    std::vector<std::optional<FailedGeneration>> failed(prompts.size());
    parallel_for(prompts.size(), c.llm.max_concurrency, [&](size_t i) {
        try {
            slots[i] = client.complete(prompts[i]);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProviderExhausted) throw;
            failed[i] = FailedGeneration{prompts[i].proverb_id, *prompts[i].strategy, e.what()};
        }
    });

    GenerationPhase out;
    for (auto& s : slots) {
        if (s) out.records.push_back(std::move(*s));
    }
    for (auto& f : failed) {
        if (f) out.failures.push_back(std::move(*f));
    }
    sort_generations(out.records);
    out.stats = client.stats();

    const double fraction =
        prompts.empty() ? 0.0 : static_cast<double>(out.failures.size()) / static_cast<double>(prompts.size());
    if (fraction > c.max_missing_fraction) {
        throw Error(ErrorCode::ProviderExhausted, std::to_string(out.failures.size()) + " of " +
                                                      std::to_string(prompts.size()) + " generations failed");
    }
    return out;
}

JudgePanel make_panel(const RunConfig& c, const ProviderOverrides& overrides, std::shared_ptr<const ResponseCache> cache) {
    std::vector<std::shared_ptr<LlmClient>> clients;
    for (const auto& j : c.judges) {
        auto it = overrides.judges.find(j.effective_tag());
        auto provider = it != overrides.judges.end() ? it->second : make_provider(j);
        clients.push_back(std::make_shared<LlmClient>(j, provider, cache));
    }
    return JudgePanel(std::move(clients), c.accuracy_scale);
}

// Scores persisted generations and writes report.json / report.md.
void score_and_report(const PreparedRun& run, RunSummary& summary) {
    const RunConfig& c = run.config;
    std::map<Strategy, BleuReport> bleu;
    std::map<Strategy, double> bert_means;
    std::map<std::pair<Strategy, std::string>, double> item_bert;
    std::map<Strategy, size_t> failed_counts;
    std::string bert_model;
    const bool use_bertscore = c.bertscore_url && !c.skip_bertscore;

    for (const auto& f : summary.failed_generations) ++failed_counts[f.strategy];

    for (Strategy s : c.strategies) {
        std::vector<TextPair> pairs;
        std::vector<std::string> ids;
        for (const auto& g : summary.generations) {
            if (g.strategy != s) continue;
            const Proverb* p = run.corpus.find(g.proverb_id);
            if (p == nullptr) throw Error(ErrorCode::PreconditionViolation, "generation for unknown proverb " + g.proverb_id);
            pairs.emplace_back(c.score_raw ? std::string(text::trim(g.raw_output)) : g.final_interpretation,
                               p->reference_gloss);
            ids.push_back(g.proverb_id);
        }
        if (pairs.empty()) continue;
        try {
            bleu[s] = corpus_bleu(pairs);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AllCandidatesEmpty) throw;
            bleu[s] = BleuReport{};
        }
        if (use_bertscore) {
            std::vector<TextPair> scorable;
            std::vector<size_t> positions;
            for (size_t i = 0; i < pairs.size(); ++i) {
                if (!text::trim(pairs[i].first).empty()) {
                    scorable.push_back(pairs[i]);
                    positions.push_back(i);
                }
            }
            std::vector<double> f1(pairs.size(), 0.0);
            const auto scored = bertscore_batch(scorable, *c.bertscore_url);
            for (size_t i = 0; i < scored.size(); ++i) {
                f1[positions[i]] = scored[i].f1;
                bert_model = scored[i].model_tag;
            }
            double sum = 0.0;
            for (size_t i = 0; i < f1.size(); ++i) {
                sum += f1[i];
                item_bert[{s, ids[i]}] = f1[i];
            }
            bert_means[s] = sum / static_cast<double>(f1.size());
        }
    }

    summary.reports = aggregate_reports(c.strategies, summary.generations, summary.judging.verdicts,
                                        summary.judging.missing, bleu, bert_means, failed_counts);

    ordered_json report;
    report["format_version"] = 1;
    report["corpus_checksum"] = run.corpus.checksum();
    ordered_json settings;
    settings["strategies"] = ordered_json::array();
    for (const auto& r : summary.reports) settings["strategies"].push_back(std::string(strategy_name(r.strategy)));
    settings["k"] = c.k;
    settings["n"] = c.n;
    settings["seed"] = c.seed;
    settings["accuracy_scale"] = std::string(accuracy_scale_name(c.accuracy_scale));
    settings["score_raw"] = c.score_raw;
    settings["embed_provider"] = c.embed.provider_tag();
    settings["embed_dim"] = c.embed.dim;
    settings["llm_provider"] = c.llm.provider_tag();
    settings["llm_temperature"] = c.llm.temperature;
    settings["judges"] = ordered_json::array();
    for (const auto& j : c.judges) settings["judges"].push_back(j.effective_tag());
    settings["template_versions"] = ordered_json::object();
    for (const auto& r : summary.reports) {
        settings["template_versions"][std::string(strategy_name(r.strategy))] =
            run.templates.get(strategy_name(r.strategy)).version;
    }
    settings["rubric_version"] = run.templates.get(rubric_key(c.accuracy_scale)).version;
    report["settings"] = settings;

    report["methods"] = ordered_json::array();
    for (const auto& r : summary.reports) report["methods"].push_back(to_json(r));
    try {
        const auto rows = ablation_report(summary.reports);
        report["ablation"] = ordered_json::array();
        for (const auto& row : rows) report["ablation"].push_back(to_json(row));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MissingStrategy) throw;
        report["ablation"] = nullptr;
    }

    report["bleu"] = ordered_json::object();
    for (const auto& [s, b] : bleu) {
        report["bleu"][std::string(strategy_name(s))] = {{"score", b.score},
                                                          {"precisions", b.precisions},
                                                          {"brevity_penalty", b.brevity_penalty},
                                                          {"candidate_len", b.candidate_len},
                                                          {"reference_len", b.reference_len},
                                                          {"smoothing_applied", b.smoothing_applied},
                                                          {"matches", b.matches},
                                                          {"totals", b.totals}};
    }
    report["bertscore_model"] = use_bertscore ? ordered_json(bert_model) : ordered_json(nullptr);

    report["items"] = ordered_json::array();
    for (const auto& g : summary.generations) {
        ordered_json item;
        item["proverb_id"] = g.proverb_id;
        item["strategy"] = std::string(strategy_name(*g.strategy));
        item["prompt_digest"] = g.prompt_digest;
        item["final_interpretation"] = g.final_interpretation;
        item["extraction_fallback"] = g.extraction_fallback;
        item["verdicts"] = ordered_json::array();
        for (const auto& v : summary.judging.verdicts) {
            if (v.proverb_id != g.proverb_id || v.strategy != *g.strategy) continue;
            item["verdicts"].push_back({{"judge_tag", v.judge_tag},
                                        {"accuracy", v.accuracy},
                                        {"accuracy_score", v.accuracy_score},
                                        {"cultural_depth", v.cultural_depth},
                                        {"parse_fallback", v.parse_fallback}});
        }
        if (auto it = item_bert.find({*g.strategy, g.proverb_id}); it != item_bert.end()) {
            item["bertscore_f1"] = it->second;
        }
        report["items"].push_back(item);
    }
    report["missing_verdicts"] = ordered_json::array();
    for (const auto& m : summary.judging.missing) {
        report["missing_verdicts"].push_back({{"proverb_id", m.proverb_id},
                                              {"strategy", std::string(strategy_name(m.strategy))},
                                              {"judge_tag", m.judge_tag}});
    }
    report["failed_generations"] = ordered_json::array();
    for (const auto& f : summary.failed_generations) {
        report["failed_generations"].push_back(
            {{"proverb_id", f.proverb_id}, {"strategy", std::string(strategy_name(f.strategy))}});
    }

    write_file_atomic(summary.run_dir / "report.json", report.dump(2) + "\n");

    std::string md = render_markdown(summary.reports);
    if (!report["ablation"].is_null()) md += "\n" + render_ablation_markdown(ablation_report(summary.reports));
    write_file_atomic(summary.run_dir / "report.md", md);
}

}  // namespace

RunSummary run_experiment(const RunConfig& config, const ProviderOverrides& overrides) {
    const std::string started = utc_now();
    std::error_code ec;
    if (!config.dry_run && fs::exists(config.run_dir() / "report.json", ec)) {
        throw Error(ErrorCode::RunExists, "run '" + config.run_id + "' already has a report in " + config.output_dir.string());
    }
    const PreparedRun run = prepare_run(config);
    RunSummary summary;
    summary.run_dir = config.run_dir();
    write_config_snapshot(config);

    const std::vector<PromptBundle> prompts = build_prompts(run);
    {
        std::vector<ordered_json> rows;
        for (const auto& b : prompts) rows.push_back(ordered_json::parse(bundle_to_json(b)));
        write_jsonl(summary.run_dir / "prompts.jsonl", rows);
    }
    summary.prompts_written = prompts.size();
    if (config.dry_run) {
        write_metadata(config, started, summary, "dry_run");
        return summary;
    }

    auto cache = std::make_shared<const ResponseCache>(config.cache_dir);
    GenerationPhase gen = generate(config, prompts, overrides.llm, cache);
    summary.generations = std::move(gen.records);
    summary.failed_generations = std::move(gen.failures);
    summary.llm_stats = gen.stats;
    persist_generations(summary.run_dir, summary.generations, summary.failed_generations);

    const JudgePanel panel = make_panel(config, overrides, cache);
    summary.judging = judge_all(summary.generations, panel, run.corpus, run.templates);
    for (const auto& j : panel.judges()) summary.judge_stats.push_back(j->stats());
    persist_verdicts(summary.run_dir, summary.judging);
    enforce_missing_threshold(summary.judging, config.max_missing_fraction);

    score_and_report(run, summary);
    write_metadata(config, started, summary, "run");
    return summary;
}

RunSummary judge_run(const RunConfig& config, const ProviderOverrides& overrides) {
    const std::string started = utc_now();
    const PreparedRun run = prepare_run(config);
    RunSummary summary;
    summary.run_dir = config.run_dir();
    load_generations(summary.run_dir, summary.generations, summary.failed_generations);

    auto cache = std::make_shared<const ResponseCache>(config.cache_dir);
    const JudgePanel panel = make_panel(config, overrides, cache);
    summary.judging = judge_all(summary.generations, panel, run.corpus, run.templates);
    for (const auto& j : panel.judges()) summary.judge_stats.push_back(j->stats());
    persist_verdicts(summary.run_dir, summary.judging);
    enforce_missing_threshold(summary.judging, config.max_missing_fraction);

    score_and_report(run, summary);
    write_metadata(config, started, summary, "judge");
    return summary;
}

RunSummary report_run(const RunConfig& config) {
    const std::string started = utc_now();
    const PreparedRun run = prepare_run(config);
    RunSummary summary;
    summary.run_dir = config.run_dir();
    load_generations(summary.run_dir, summary.generations, summary.failed_generations);
    summary.judging = load_verdicts(summary.run_dir, summary.generations.size() * config.judges.size());
    score_and_report(run, summary);
    write_metadata(config, started, summary, "report");
    return summary;
}

}  // namespace proverb
