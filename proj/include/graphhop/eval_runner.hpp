#pragma once
// Batch evaluation: run every configured controller over every question
// under one shared gold mapping, write records and traces, compute pairwise
// bootstrap comparisons and type / scatter breakdowns.
//
// report.json is a pure function of (questions, snapshot, config, seed);
// wall-clock timings live only in the records and traces.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "graphhop/controllers.hpp"
#include "graphhop/evaluation.hpp"
#include "graphhop/gateway.hpp"
#include "graphhop/trace.hpp"

namespace graphhop {

struct EvalOptions {
    std::vector<std::string> controllers = {"vector_only", "graphrag_local", "heuristic_rlm"};
    ControllerConfig cfg;
    std::uint64_t bootstrap_seed = 17;
    int bootstrap_resamples = 10000;
    int parallelism = 1;
    std::string out_dir;              // empty: nothing written to disk
    nlohmann::json script;            // scripted gateway spec (may hold by_question)
    Gateway* shared_gateway = nullptr;  // used when no script is given
    Clock clock = steady_clock_ms();
};

struct EvalOutcome {
    std::vector<EvalRecord> records;  // grouped by controller, questions in input order
    nlohmann::json report;
    std::string report_text;
};

namespace detail {

inline double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

struct GroupStats {
    int n = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    double tokens = 0.0, gateway_tokens = 0.0;

    void add(const EvalRecord& r) {
        n += 1;
        precision += r.precision;
        recall += r.recall;
        f1 += r.f1;
        tokens += static_cast<double>(r.token_estimate);
        gateway_tokens += static_cast<double>(r.gateway_tokens);
    }

    nlohmann::json to_json() const {
        if (n == 0) return {{"n", 0}};
        return {{"n", n}, {"precision", precision / n}, {"recall", recall / n},
                {"f1", f1 / n}, {"mean_token_estimate", tokens / n},
                {"mean_gateway_tokens", gateway_tokens / n}};
    }
};

inline std::string fixed3(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << v;
    return out.str();
}

}  // namespace detail

// Mutates questions in place: fills gold_chunks / unmapped_sentences.
inline void map_gold_for_questions(std::vector<Question>& questions, const MentionGraph& graph,
                                   const VectorIndex& index, Embedder& embedder,
                                   int k_fallback = 5, double sim_threshold = 0.25) {
    for (auto& q : questions) {
        GoldMapping m = map_evidence_to_chunks(q.gold_evidence, graph, index, embedder,
                                               k_fallback, sim_threshold);
        q.gold_chunks = std::move(m.chunks);
        q.unmapped_sentences = std::move(m.unmapped_sentences);
    }
}

inline EvalOutcome run_eval(std::vector<Question>& questions, const MentionGraph& graph,
                            const VectorIndex& index, Embedder& embedder,
                            const EvalOptions& opts) {
    if (questions.empty()) throw ValidationError("eval requires at least one question");
    if (opts.controllers.empty()) throw ValidationError("eval requires at least one controller");
    opts.cfg.validate();
    for (const auto& name : opts.controllers) {
        if (std::find(controller_names().begin(), controller_names().end(), name) ==
            controller_names().end())
            throw ValidationError("unknown controller: " + name);
        if (name == "llm_rlm" && opts.script.is_null() && !opts.shared_gateway)
            throw ValidationError("llm_rlm requires a script or a gateway");
    }

    namespace fs = std::filesystem;
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        for (const auto& c : opts.controllers)
            fs::create_directories(fs::path(opts.out_dir) / "traces" / c);
    }

    map_gold_for_questions(questions, graph, index, embedder);

    const std::size_t nq = questions.size();
    const std::size_t nc = opts.controllers.size();
    std::vector<EvalRecord> matrix(nq * nc);

    auto run_one = [&](std::size_t qi, std::size_t ci) {
        const Question& q = questions[qi];
        const std::string& name = opts.controllers[ci];
        ToolContext ctx{&graph, &index, &embedder, opts.shared_gateway, opts.cfg.n_seed};

        std::unique_ptr<ScriptedGateway> scripted;
        if (name == "llm_rlm" && !opts.script.is_null()) {
            scripted = std::make_unique<ScriptedGateway>(
                select_script(opts.script, q.qid, q.question));
            ctx.gateway = scripted.get();
        }

        EvalRecord record;
        record.qid = q.qid;
        record.controller = name;
        ControllerResult result;
        try {
            result = run_controller(name, q.question, ctx, opts.cfg, opts.clock);
        } catch (const Error& e) {
            record.error = e.what();
        }
        for (const auto& item : result.evidence.items) record.retrieved.push_back(item.chunk_id);
        record.evidence = result.evidence.items;
        if (result.error) record.error = result.error;

        std::set<std::string> retrieved_set(record.retrieved.begin(), record.retrieved.end());
        Prf prf = prf1(retrieved_set, q.gold_chunks);
        record.precision = prf.precision;
        record.recall = prf.recall;
        record.f1 = prf.f1;
        record.scatter = scatter_bin(static_cast<int>(q.gold_chunks.size()));
        record.token_estimate = result.evidence.token_estimate;
        record.gateway_tokens = result.evidence.gateway_tokens;
        record.wall_ms = result.evidence.wall_ms;
        record.flagged = q.gold_chunks.empty() || record.error.has_value();

        if (!opts.out_dir.empty()) {
            std::string leaf = percent_encode(q.qid) + ".jsonl";
            fs::path trace_path = fs::path(opts.out_dir) / "traces" / name / leaf;
            record.trace_ref = (fs::path("traces") / name / leaf).string();
            TraceMeta meta{name, q.qid, q.question, opts.cfg.to_json()};
            write_trace_file(trace_path.string(), meta, result.state, result.evidence,
                             record.error);
        }
        matrix[ci * nq + qi] = std::move(record);
    };

    const int workers = std::max(1, std::min<int>(opts.parallelism, static_cast<int>(nq)));
    if (workers == 1) {
        for (std::size_t ci = 0; ci < nc; ++ci)
            for (std::size_t qi = 0; qi < nq; ++qi) run_one(qi, ci);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                std::size_t qi = next.fetch_add(1);
                if (qi >= nq) break;
                for (std::size_t ci = 0; ci < nc; ++ci) run_one(qi, ci);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    EvalOutcome outcome;
    outcome.records.reserve(matrix.size());
    for (std::size_t ci = 0; ci < nc; ++ci)
        for (std::size_t qi = 0; qi < nq; ++qi)
            outcome.records.push_back(std::move(matrix[ci * nq + qi]));

    // Aggregates exclude flagged questions (empty gold or controller error).
    auto record_at = [&](std::size_t ci, std::size_t qi) -> const EvalRecord& {
        return outcome.records[ci * nq + qi];
    };

    nlohmann::json controllers_json = nlohmann::json::object();
    nlohmann::json by_type = nlohmann::json::object();
    nlohmann::json by_scatter = nlohmann::json::object();
    for (std::size_t ci = 0; ci < nc; ++ci) {
        detail::GroupStats overall;
        std::map<std::string, detail::GroupStats> per_type;
        std::map<std::string, detail::GroupStats> per_bin;
        for (std::size_t qi = 0; qi < nq; ++qi) {
            const EvalRecord& r = record_at(ci, qi);
            if (r.flagged) continue;
            overall.add(r);
            per_type[to_string(questions[qi].qtype)].add(r);
            per_bin[scatter_bin_name(r.scatter)].add(r);
        }
        const std::string& name = opts.controllers[ci];
        controllers_json[name] = overall.to_json();
        nlohmann::json types = nlohmann::json::object();
        for (const auto& [t, stats] : per_type) types[t] = stats.to_json();
        by_type[name] = types;
        nlohmann::json bins = nlohmann::json::object();
        for (const auto& [b, stats] : per_bin) bins[b] = stats.to_json();
        by_scatter[name] = bins;
    }

    // Pairwise comparisons in listed order: delta = later minus earlier.
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i = 0; i < nc; ++i) {
        for (std::size_t j = i + 1; j < nc; ++j) {
            std::vector<double> deltas;
            for (std::size_t qi = 0; qi < nq; ++qi) {
                const EvalRecord& a = record_at(i, qi);
                const EvalRecord& b = record_at(j, qi);
                if (a.flagged || b.flagged) continue;
                deltas.push_back(b.f1 - a.f1);
            }
            nlohmann::json entry = {{"baseline", opts.controllers[i]},
                                    {"candidate", opts.controllers[j]},
                                    {"n", deltas.size()}};
            if (deltas.size() >= 2) {
                std::uint64_t seed = opts.bootstrap_seed ^
                                     fnv1a64(opts.controllers[i] + "|" + opts.controllers[j]);
                BootstrapReport br =
                    paired_bootstrap(deltas, opts.bootstrap_resamples, seed);
                entry["bootstrap"] = br.to_json();
            } else {
                entry["bootstrap"] = nullptr;
            }
            pairs.push_back(entry);
        }
    }

    std::size_t empty_gold = 0, unmapped_total = 0;
    for (const auto& q : questions) {
        empty_gold += q.gold_chunks.empty() ? 1 : 0;
        unmapped_total += q.unmapped_sentences.size();
    }

    outcome.report = {{"config", opts.cfg.to_json()},
                      {"bootstrap_seed", opts.bootstrap_seed},
                      {"bootstrap_resamples", opts.bootstrap_resamples},
                      {"questions", nq},
                      {"empty_gold_questions", empty_gold},
                      {"unmapped_sentences", unmapped_total},
                      {"controllers", controllers_json},
                      {"pairs", pairs},
                      {"by_type", by_type},
                      {"by_scatter", by_scatter}};

    // Plain-text tables.
    std::ostringstream text;
    text << "Retrieval results (chunk-level, macro means over " << nq - empty_gold
         << " scored questions)\n";
    text << std::left << std::setw(16) << "controller" << std::right << std::setw(6) << "n"
         << std::setw(9) << "P" << std::setw(9) << "R" << std::setw(9) << "F1"
         << std::setw(12) << "tool_tok" << std::setw(12) << "gw_tok" << "\n";
    for (std::size_t ci = 0; ci < nc; ++ci) {
        const auto& stats = controllers_json[opts.controllers[ci]];
        text << std::left << std::setw(16) << opts.controllers[ci] << std::right
             << std::setw(6) << stats.value("n", 0);
        if (stats.value("n", 0) > 0)
            text << std::setw(9) << detail::fixed3(stats["precision"].get<double>())
                 << std::setw(9) << detail::fixed3(stats["recall"].get<double>())
                 << std::setw(9) << detail::fixed3(stats["f1"].get<double>())
                 << std::setw(12) << static_cast<long long>(stats["mean_token_estimate"].get<double>())
                 << std::setw(12) << static_cast<long long>(stats["mean_gateway_tokens"].get<double>());
        text << "\n";
    }
    text << "\nPairwise comparisons (candidate - baseline, F1)\n";
    for (const auto& p : pairs) {
        text << "  " << p["candidate"].get<std::string>() << " vs "
             << p["baseline"].get<std::string>();
        if (!p["bootstrap"].is_null()) {
            const auto& b = p["bootstrap"];
            text << ": delta " << detail::fixed3(b["mean_delta_pp"].get<double>()) << " pp, CI ["
                 << detail::fixed3(b["ci_low_pp"].get<double>()) << ", "
                 << detail::fixed3(b["ci_high_pp"].get<double>()) << "], p "
                 << b["p_two_sided"].get<double>() << ", W/T/L " << b["wins"].get<int>() << "/"
                 << b["ties"].get<int>() << "/" << b["losses"].get<int>();
        } else {
            text << ": not enough scored questions";
        }
        text << "\n";
    }
    text << "\nBy question type (F1)\n";
    for (std::size_t ci = 0; ci < nc; ++ci) {
        text << "  " << opts.controllers[ci] << ":";
        for (const auto& [t, stats] : by_type[opts.controllers[ci]].items())
            text << " " << t << "=" << detail::fixed3(stats.value("f1", 0.0)) << " (n="
                 << stats.value("n", 0) << ")";
        text << "\n";
    }
    text << "\nBy evidence scatter (F1)\n";
    for (std::size_t ci = 0; ci < nc; ++ci) {
        text << "  " << opts.controllers[ci] << ":";
        for (const auto& [b, stats] : by_scatter[opts.controllers[ci]].items())
            text << " " << b << "=" << detail::fixed3(stats.value("f1", 0.0)) << " (n="
                 << stats.value("n", 0) << ")";
        text << "\n";
    }
    outcome.report_text = text.str();

    if (!opts.out_dir.empty()) {
        namespace fs = std::filesystem;
        for (std::size_t ci = 0; ci < nc; ++ci) {
            std::ofstream out(fs::path(opts.out_dir) /
                              ("records_" + opts.controllers[ci] + ".jsonl"));
            for (std::size_t qi = 0; qi < nq; ++qi)
                out << record_at(ci, qi).to_json().dump() << "\n";
        }
        nlohmann::json gold = nlohmann::json::object();
        for (const auto& q : questions) {
            gold[q.qid] = {{"question", q.question}, {"type", to_string(q.qtype)},
                           {"gold", std::vector<std::string>(q.gold_chunks.begin(),
                                                             q.gold_chunks.end())},
                           {"unmapped_sentences", q.unmapped_sentences}};
        }
        std::ofstream gold_out(fs::path(opts.out_dir) / "gold.json");
        gold_out << gold.dump(2) << "\n";
        std::ofstream report_out(fs::path(opts.out_dir) / "report.json");
        report_out << outcome.report.dump(2) << "\n";
        std::ofstream text_out(fs::path(opts.out_dir) / "report.txt");
        text_out << outcome.report_text;
    }
    return outcome;
}

}  // namespace graphhop
