// graphhop command-line entry point.
//
// Subcommands: build, ask, eval, diagnose, export-triples. Every run is
// reproducible from its flags and config file alone; a config file uses
// CLI11's key=value format and command-line flags override it.
//
// Exit codes: 0 ok, 1 usage, 2 data validation, 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/controllers.hpp"
#include "graphhop/corpus.hpp"
#include "graphhop/diagnostics.hpp"
#include "graphhop/entity.hpp"
#include "graphhop/eval_runner.hpp"
#include "graphhop/evaluation.hpp"
#include "graphhop/graph.hpp"
#include "graphhop/http_adapters.hpp"
#include "graphhop/snapshot.hpp"
#include "graphhop/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    graphhop::ControllerConfig cfg;
    int dim = 256;
};

void add_controller_flags(CLI::App* cmd, graphhop::ControllerConfig& cfg) {
    cmd->add_option("--k", cfg.k, "Evidence budget (max retrieved chunks)")
        ->capture_default_str();
    cmd->add_option("--seed-k", cfg.seed_k, "Vector seed count for graphrag_local")
        ->capture_default_str();
    cmd->add_option("--expand-entities", cfg.expand_entities,
                    "Entities expanded by graphrag_local")
        ->capture_default_str();
    cmd->add_option("--per-entity-chunk-cap", cfg.per_entity_chunk_cap,
                    "Chunk cap per expanded entity")
        ->capture_default_str();
    cmd->add_option("--bfs-depth", cfg.bfs_depth, "Max traversal depth for heuristic_rlm")
        ->capture_default_str();
    cmd->add_option("--max-turns", cfg.max_turns, "Gateway turn budget for llm_rlm")
        ->capture_default_str();
    cmd->add_option("--stall-break-heuristic", cfg.stall_break_heuristic,
                    "Zero-yield iterations before the heuristic stops")
        ->capture_default_str();
    cmd->add_option("--stall-break-llm", cfg.stall_break_llm,
                    "Stalled turns before the llm loop stops (with half budget spent)")
        ->capture_default_str();
    cmd->add_option("--boost", cfg.boost, "Additive score bonus for collected chunks")
        ->capture_default_str();
    cmd->add_option("--backfill-discount", cfg.backfill_discount,
                    "Multiplier on vector scores for backfill chunks")
        ->capture_default_str();
    cmd->add_option("--n-seed", cfg.n_seed, "Seed entity cap for entity_search")
        ->capture_default_str();
}

void use_config_file(CLI::App* cmd) {
    cmd->set_config("--config", "", "Config file (key=value, flags override)");
    cmd->allow_config_extras(false);
}

std::unique_ptr<graphhop::Gateway> make_gateway(const std::string& script_path) {
    if (!script_path.empty())
        return std::make_unique<graphhop::ScriptedGateway>(
            graphhop::load_script_file(script_path));
    const char* url = std::getenv("LLM_URL");
    if (url && *url) {
        const char* key = std::getenv("LLM_API_KEY");
        return std::make_unique<graphhop::HttpGateway>(url, key ? key : "");
    }
    return nullptr;
}

int cmd_build(const std::string& corpus_path, const std::string& out_dir,
              const std::string& annotations_path, const std::string& gazetteer_path,
              bool no_builtin_ner, const CommonArgs& args, int max_words, int overlap_words) {
    auto docs = graphhop::load_corpus(corpus_path);
    if (docs.empty()) throw graphhop::ValidationError("corpus is empty: " + corpus_path);

    graphhop::Gazetteer gazetteer;
    if (!gazetteer_path.empty()) gazetteer = graphhop::load_gazetteer(gazetteer_path);

    std::vector<graphhop::Chunk> chunks;
    for (const auto& doc : docs) {
        auto dc = graphhop::chunk_document(doc, max_words, overlap_words);
        chunks.insert(chunks.end(), dc.begin(), dc.end());
    }

    std::vector<graphhop::MentionSpan> spans;
    if (!no_builtin_ner) {
        for (const auto& doc : docs) {
            auto ds = graphhop::extract_entities_builtin(doc.text, gazetteer, doc.doc_id);
            spans.insert(spans.end(), ds.begin(), ds.end());
        }
    }
    if (!annotations_path.empty()) {
        auto as = graphhop::load_annotations(annotations_path, docs);
        spans.insert(spans.end(), as.begin(), as.end());
    }

    auto graph = graphhop::build_graph(docs, chunks, spans);

    auto embedder = graphhop::make_embedder_from_env(args.dim);
    graphhop::VectorIndex index(args.dim);
    for (const auto& c : chunks) index.upsert(c.chunk_id, embedder->embed(c.text));

    fs::create_directories(out_dir);
    json settings = {{"max_words", max_words}, {"overlap_words", overlap_words},
                     {"builtin_ner", !no_builtin_ner},
                     {"annotations", !annotations_path.empty()},
                     {"gazetteer", !gazetteer_path.empty()}};
    std::string snapshot_path = (fs::path(out_dir) / "snapshot.json").string();
    graphhop::save_snapshot(snapshot_path, graph, index, settings);

    std::size_t linked_chunks = 0, mention_links = 0;
    for (const auto& cid : graph.chunk_order()) {
        std::size_t n = graph.entities_for_chunk(cid).size();
        mention_links += n;
        linked_chunks += n > 0 ? 1 : 0;
    }
    double per_chunk = chunks.empty() ? 0.0
                                      : static_cast<double>(mention_links) /
                                            static_cast<double>(chunks.size());
    std::cout << "documents            " << docs.size() << "\n"
              << "chunks               " << chunks.size() << "\n"
              << "entities             " << graph.entity_size() << "\n"
              << "mention links        " << mention_links << "\n"
              << "links per chunk      " << per_chunk << "\n"
              << "chunks with entities "
              << (chunks.empty() ? 0.0
                                 : 100.0 * static_cast<double>(linked_chunks) /
                                       static_cast<double>(chunks.size()))
              << "%\n"
              << "snapshot             " << snapshot_path << "\n";
    return 0;
}

int cmd_ask(const std::string& snapshot_path, const std::string& question,
            const std::string& controller, const std::string& script_path,
            const std::string& out_dir, bool answer, const CommonArgs& args) {
    auto snap = graphhop::load_snapshot(snapshot_path);
    auto embedder = graphhop::make_embedder_from_env(snap.index.dim());

    auto gateway = make_gateway(script_path);
    graphhop::ToolContext ctx{&snap.graph, &snap.index, embedder.get(), gateway.get(),
                              args.cfg.n_seed};
    auto result = graphhop::run_controller(controller, question, ctx, args.cfg);

    std::cout << "controller " << controller << ", " << result.evidence.items.size()
              << " evidence chunks, tool tokens " << result.evidence.token_estimate
              << ", gateway tokens " << result.evidence.gateway_tokens << ", wall "
              << result.evidence.wall_ms << " ms\n";
    for (const auto& item : result.evidence.items) {
        const auto& chunk = snap.graph.chunk(item.chunk_id);
        std::string preview = chunk.text.substr(0, 80);
        for (char& c : preview)
            if (c == '\n') c = ' ';
        char score[16];
        std::snprintf(score, sizeof(score), "%.3f", item.score);
        std::cout << "  " << item.chunk_id << "  score " << score << "  ["
                  << to_string(item.source) << "]  doc " << chunk.doc_id << "  " << preview
                  << "\n";
    }
    if (result.error) std::cout << "controller error: " << *result.error << "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::string qid = "ask-" + graphhop::digest(question);
        graphhop::TraceMeta meta{controller, qid, question, args.cfg.to_json()};
        std::string trace_path = (fs::path(out_dir) / (qid + ".jsonl")).string();
        graphhop::write_trace_file(trace_path, meta, result.state, result.evidence,
                                   result.error);
        std::cout << "trace " << trace_path << "\n";
    }

    if (answer) {
        if (!gateway)
            throw graphhop::ValidationError("--answer requires a gateway (script or LLM_URL)");
        std::string prompt = "Answer the question using only the evidence chunks.\nQuestion: " +
                             question + "\n\n";
        for (const auto& item : result.evidence.items)
            prompt += "[" + item.chunk_id + "]\n" + snap.graph.chunk(item.chunk_id).text + "\n\n";
        std::cout << "answer: " << gateway->oneshot(prompt) << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& snapshot_path, const std::string& questions_path,
             const std::vector<std::string>& controllers, const std::string& script_path,
             const std::string& out_dir, std::uint64_t seed, int resamples, int parallel,
             const CommonArgs& args) {
    auto snap = graphhop::load_snapshot(snapshot_path);
    auto embedder = graphhop::make_embedder_from_env(snap.index.dim());
    auto questions = graphhop::load_questions(questions_path);

    graphhop::EvalOptions opts;
    opts.controllers = controllers;
    opts.cfg = args.cfg;
    opts.bootstrap_seed = seed;
    opts.bootstrap_resamples = resamples;
    opts.parallelism = parallel;
    opts.out_dir = out_dir;
    std::unique_ptr<graphhop::Gateway> gateway;
    if (!script_path.empty()) {
        opts.script = graphhop::load_script_file(script_path);
    } else {
        gateway = make_gateway("");
        opts.shared_gateway = gateway.get();
    }

    auto outcome = graphhop::run_eval(questions, snap.graph, snap.index, *embedder, opts);
    std::cout << outcome.report_text;
    if (!out_dir.empty()) std::cout << "\nreports written to " << out_dir << "\n";
    return 0;
}

int cmd_diagnose(const std::string& snapshot_path, const std::string& eval_dir,
                 const std::string& out_path, const CommonArgs& args) {
    auto snap = graphhop::load_snapshot(snapshot_path);

    std::string gold_path = (fs::path(eval_dir) / "gold.json").string();
    std::ifstream gold_in(gold_path, std::ios::binary);
    if (!gold_in)
        throw graphhop::IoError("cannot open " + gold_path + " (run eval with --out first)");
    json gold = json::parse(gold_in, nullptr, false);
    if (gold.is_discarded()) throw graphhop::ParseError("invalid gold.json in " + eval_dir);

    std::vector<graphhop::Question> questions;
    for (const auto& [qid, entry] : gold.items()) {
        graphhop::Question q;
        q.qid = qid;
        q.question = entry.value("question", "");
        auto t = graphhop::parse_question_type(entry.value("type", "FactRetrieval"));
        q.qtype = t.value_or(graphhop::QuestionType::FactRetrieval);
        for (const auto& cid : entry["gold"]) q.gold_chunks.insert(cid.get<std::string>());
        questions.push_back(std::move(q));
    }

    std::map<std::string, std::vector<graphhop::EvalRecord>> records_by_controller;
    for (const auto& entry : fs::directory_iterator(eval_dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("records_", 0) != 0 || entry.path().extension() != ".jsonl") continue;
        std::string controller = name.substr(8, name.size() - 8 - 6);
        std::ifstream in(entry.path(), std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (graphhop::normalize_ws(line).empty()) continue;
            json obj = json::parse(line, nullptr, false);
            if (obj.is_discarded())
                throw graphhop::ParseError("invalid record line in " + entry.path().string());
            records_by_controller[controller].push_back(graphhop::EvalRecord::from_json(obj));
        }
    }
    if (records_by_controller.empty())
        throw graphhop::ValidationError("no records_*.jsonl files in " + eval_dir);

    fs::path trace_root = fs::path(eval_dir) / "traces";
    if (!fs::exists(trace_root))
        throw graphhop::IoError("missing trace directory: " + trace_root.string());
    std::map<std::string, std::vector<graphhop::Trace>> traces_by_controller;
    for (const auto& [controller, records] : records_by_controller) {
        for (const auto& r : records) {
            fs::path p = fs::path(eval_dir) / r.trace_ref;
            if (fs::exists(p))
                traces_by_controller[controller].push_back(graphhop::load_trace_file(p.string()));
        }
    }

    json health = json::object();
    json failures = json::array();
    for (const auto& [controller, records] : records_by_controller) {
        auto report = graphhop::compute_kg_health(records, traces_by_controller[controller],
                                                  snap.graph, questions, args.cfg.n_seed);
        health[controller] = report.to_json();
        json cats = graphhop::categorize_failures(records, traces_by_controller[controller],
                                                  snap.graph, questions, args.cfg.n_seed);
        for (const auto& c : cats) failures.push_back(c);
    }

    json out = {{"health", health}, {"failures", failures}};
    std::cout << out.dump(2) << "\n";
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw graphhop::IoError("cannot write " + out_path);
        f << out.dump(2) << "\n";
        std::cout << "diagnostics written to " << out_path << "\n";
    }
    return 0;
}

int cmd_export_triples(const std::string& snapshot_path, const std::string& out_path) {
    auto snap = graphhop::load_snapshot(snapshot_path);
    if (out_path.empty() || out_path == "-") {
        snap.graph.export_triples(std::cout);
    } else {
        snap.graph.export_triples(out_path);
        std::cout << "triples written to " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphhop: mention-graph retrieval engine and evaluation harness"};
    app.require_subcommand(1);

    CommonArgs args;

    // build
    std::string corpus_path, build_out, annotations_path, gazetteer_path;
    bool no_builtin_ner = false;
    int max_words = 240, overlap_words = 40;
    auto* build = app.add_subcommand("build", "Build the graph and vector index from a corpus");
    build->add_option("--corpus", corpus_path, "Corpus JSONL (doc_id, title, text)")
        ->required()->check(CLI::ExistingFile);
    build->add_option("--out", build_out, "Output directory for the snapshot")->required();
    build->add_option("--annotations", annotations_path,
                      "Sidecar mention annotations JSONL")->check(CLI::ExistingFile);
    build->add_option("--gazetteer", gazetteer_path,
                      "Gazetteer JSON object label->type")->check(CLI::ExistingFile);
    build->add_flag("--no-builtin-ner", no_builtin_ner,
                    "Skip the built-in extractor (use annotations only)");
    build->add_option("--dim", args.dim, "Embedding dimension")->capture_default_str();
    build->add_option("--max-words", max_words, "Chunk word budget")->capture_default_str();
    build->add_option("--overlap-words", overlap_words, "Chunk overlap words")
        ->capture_default_str();
    use_config_file(build);

    // ask
    std::string ask_snapshot, ask_question, ask_controller = "vector_only", ask_script,
                ask_out;
    bool ask_answer = false;
    auto* ask = app.add_subcommand("ask", "Run one question through a controller");
    ask->add_option("--snapshot", ask_snapshot, "snapshot.json from build")
        ->required()->check(CLI::ExistingFile);
    ask->add_option("--question", ask_question, "Question text")->required();
    ask->add_option("--controller", ask_controller,
                    "vector_only | graphrag_local | heuristic_rlm | llm_rlm")
        ->capture_default_str();
    ask->add_option("--script", ask_script, "Scripted gateway JSON")->check(CLI::ExistingFile);
    ask->add_option("--out", ask_out, "Directory for the trace file");
    ask->add_flag("--answer", ask_answer, "Generate an answer over the evidence");
    add_controller_flags(ask, args.cfg);
    use_config_file(ask);

    // eval
    std::string eval_snapshot, eval_questions, eval_script, eval_out;
    std::vector<std::string> eval_controllers = {"vector_only", "graphrag_local",
                                                 "heuristic_rlm"};
    std::uint64_t eval_seed = 17;
    int eval_resamples = 10000, eval_parallel = 1;
    auto* eval = app.add_subcommand("eval", "Batch-evaluate controllers against gold evidence");
    eval->add_option("--snapshot", eval_snapshot, "snapshot.json from build")
        ->required()->check(CLI::ExistingFile);
    eval->add_option("--questions", eval_questions,
                     "Questions JSONL (qid, question, type, gold_evidence)")
        ->required()->check(CLI::ExistingFile);
    eval->add_option("--controllers", eval_controllers, "Controllers to compare")
        ->delimiter(',')->capture_default_str();
    eval->add_option("--script", eval_script, "Scripted gateway JSON for llm_rlm")
        ->check(CLI::ExistingFile);
    eval->add_option("--out", eval_out, "Output directory (records, traces, reports)");
    eval->add_option("--seed", eval_seed, "Bootstrap seed")->capture_default_str();
    eval->add_option("--bootstrap-b", eval_resamples, "Bootstrap resamples")
        ->capture_default_str();
    eval->add_option("--parallel", eval_parallel, "Concurrent question evaluations")
        ->capture_default_str();
    add_controller_flags(eval, args.cfg);
    use_config_file(eval);

    // diagnose
    std::string diag_snapshot, diag_eval_dir, diag_out;
    auto* diagnose = app.add_subcommand("diagnose",
                                        "Graph-health metrics and failure categories "
                                        "from a prior eval");
    diagnose->add_option("--snapshot", diag_snapshot, "snapshot.json from build")
        ->required()->check(CLI::ExistingFile);
    diagnose->add_option("--eval-dir", diag_eval_dir, "Output directory of a prior eval")
        ->required()->check(CLI::ExistingDirectory);
    diagnose->add_option("--out", diag_out, "Write the diagnostics JSON here");
    diagnose->add_option("--n-seed", args.cfg.n_seed, "Seed entity cap for entity_search")
        ->capture_default_str();
    use_config_file(diagnose);

    // export-triples
    std::string export_snapshot, export_out;
    auto* export_cmd = app.add_subcommand("export-triples", "Write the graph as line triples");
    export_cmd->add_option("--snapshot", export_snapshot, "snapshot.json from build")
        ->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--out", export_out, "Output file (default stdout)");
    use_config_file(export_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed())
            return cmd_build(corpus_path, build_out, annotations_path, gazetteer_path,
                             no_builtin_ner, args, max_words, overlap_words);
        if (ask->parsed())
            return cmd_ask(ask_snapshot, ask_question, ask_controller, ask_script, ask_out,
                           ask_answer, args);
        if (eval->parsed())
            return cmd_eval(eval_snapshot, eval_questions, eval_controllers, eval_script,
                            eval_out, eval_seed, eval_resamples, eval_parallel, args);
        if (diagnose->parsed())
            return cmd_diagnose(diag_snapshot, diag_eval_dir, diag_out, args);
        if (export_cmd->parsed())
            return cmd_export_triples(export_snapshot, export_out);
    } catch (const graphhop::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const graphhop::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const graphhop::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
