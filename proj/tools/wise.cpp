// wise: command-line front end.
//
//   wise run   --query Q (--seeds FILE | --corpus MANIFEST) --out DIR [...]
//   wise eval  rouge|bleu|recall|levels|matrix ...
//   wise sim   generate|run|measure ...
//   wise cache list|clear --cache-dir DIR
//
// Exit codes: 0 success (warnings possible), 1 configuration or input error,
// 2 every seed source was unfetchable.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "wise/engine.hpp"
#include "wise/eval.hpp"
#include "wise/fetch.hpp"
#include "wise/filter.hpp"
#include "wise/llm.hpp"
#include "wise/serialize.hpp"
#include "wise/sim.hpp"
#include "wise/tokenize.hpp"

namespace fs = std::filesystem;
using namespace wise;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitUnfetchable = 2;

double parse_threshold(const std::string& s) {
    const std::string t = trim(s);
    if (t == "inf" || t == "infinity" || t == "Inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ConfigError("threshold is not a number: " + s);
    }
    if (used != t.size()) throw ConfigError("threshold is not a number: " + s);
    return v;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
}

json read_json(const fs::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

std::string iso_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

std::string render_report(const RunTrace& trace, const KnowledgeContainer& k) {
    std::ostringstream r;
    r << "Query: " << trace.query.text << "\n";
    r << "Threshold: " << (std::isinf(trace.config.threshold) ? std::string("inf") : fixed(trace.config.threshold))
      << "  top-k: " << trace.config.top_k << "  max layers: " << trace.config.max_layers
      << "  filter: " << to_string(trace.config.filter_mode) << "\n\n";

    r << std::left << std::setw(7) << "layer" << std::setw(9) << "sources" << std::setw(6) << "ok" << std::setw(12)
      << "max score" << std::setw(10) << "selected" << std::setw(18) << "container" << "stop\n";
    for (const auto& l : trace.layers) {
        std::size_t ok = 0;
        for (const auto& s : l.sources) ok += s.status == FetchStatus::ok ? 1 : 0;
        r << std::left << std::setw(7) << l.index << std::setw(9) << l.sources.size() << std::setw(6) << ok
          << std::setw(12) << (l.max_score ? fixed(*l.max_score) : std::string("-")) << std::setw(10)
          << l.selected.size() << std::setw(18)
          << (std::to_string(l.container_before) + " -> " + std::to_string(l.container_after))
          << (l.termination_reason ? std::string(to_string(*l.termination_reason)) : std::string("")) << "\n";
    }

    double reduction_sum = 0;
    std::size_t reduction_n = 0;
    for (const auto& l : trace.layers) {
        r << "\nLayer " << l.index << "\n";
        for (const auto& s : l.sources) {
            const bool chosen = std::find(l.selected.begin(), l.selected.end(), s.source.uri) != l.selected.end();
            r << (chosen ? "  * " : "    ") << s.source.uri << "\n      status=" << to_string(s.status);
            if (s.status == FetchStatus::ok && s.error.empty()) {
                const auto red = reduction_ratio(s.raw_token_count, s.score.word_count);
                if (red) {
                    reduction_sum += *red;
                    ++reduction_n;
                }
                r << " raw=" << s.raw_token_count << " filtered=" << s.score.word_count
                  << " unique=" << s.score.unique_contribution << " density=" << fixed(s.score.density)
                  << " increase=" << (s.score.increase ? fixed(*s.score.increase) : std::string("-"))
                  << " score=" << fixed(s.score.combined)
                  << " reduction=" << (red ? fixed(*red) : std::string("-"));
                if (s.verbatim_fraction) r << " verbatim=" << fixed(*s.verbatim_fraction);
            }
            if (!s.error.empty()) r << " error=" << s.error;
            r << "\n";
        }
    }
    r << "\nFinal container: " << k.size() << " tokens, " << k.segments.size() << " segments\n";
    if (reduction_n > 0) r << "Average reduction: " << fixed(reduction_sum / static_cast<double>(reduction_n)) << "\n";
    return r.str();
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
    std::string query, seeds, corpus, filter, endpoint, model = "gpt-4o", threshold, stopwords, cache_dir, out,
        config_file;
    int top_k = 0, max_layers = 0, max_in_flight = 0;
    std::uint64_t seed = 0;
    bool quiet = false;
};

int cmd_run(const RunOptions& o, CLI::App& app) {
    const auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };

    EngineConfig config;
    std::string query = o.query, seeds = o.seeds, corpus = o.corpus, endpoint = o.endpoint, model = o.model;
    if (given("--config")) {
        json j = read_json(o.config_file);
        if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
        auto take = [&](const char* key, std::string& dst, const char* flag) {
            if (auto it = j.find(key); it != j.end()) {
                if (!given(flag)) dst = it->get<std::string>();
                j.erase(key);
            }
        };
        take("query", query, "--query");
        take("seeds", seeds, "--seeds");
        take("corpus", corpus, "--corpus");
        take("llm_endpoint", endpoint, "--llm-endpoint");
        take("model", model, "--model");
        config = j.get<EngineConfig>();
    }
    if (given("--threshold")) config.threshold = parse_threshold(o.threshold);
    if (given("--top-k")) config.top_k = o.top_k;
    if (given("--max-layers")) config.max_layers = o.max_layers;
    if (given("--filter")) config.filter_mode = filter_mode_from_string(o.filter);
    if (given("--seed")) config.random_seed = o.seed;
    if (given("--cache-dir")) config.cache_dir = o.cache_dir;
    if (given("--max-in-flight")) config.max_in_flight = o.max_in_flight;
    if (given("--stopwords")) {
        if (o.stopwords == "none" || o.stopwords == "builtin") {
            config.stopword_policy = stopword_policy_from_string(o.stopwords);
            config.stopword_file.clear();
        } else {
            config.stopword_policy = StopwordPolicy::custom;
            config.stopword_file = o.stopwords;
        }
    }
    config.validate();

    if (seeds.empty() == corpus.empty()) throw ConfigError("give exactly one of --seeds or --corpus");
    if (o.out.empty()) throw ConfigError("--out is required");

    const TokenPolicy policy = TokenPolicy::from_config(config.stopword_policy, config.stopword_file);

    std::optional<CorpusManifest> manifest;
    std::unique_ptr<ContentProvider> provider;
    std::vector<SourceRef> seed_refs;
    if (!corpus.empty()) {
        manifest = load_manifest(corpus);
        if (query.empty()) query = manifest->spec.query;
        auto sim = std::make_unique<SimProvider>(*manifest);
        seed_refs = sim->roots();
        provider = std::move(sim);
    } else {
        if (query.empty()) throw ConfigError("--query is required with --seeds");
        FetchPolicy fp;
        fp.politeness_delay = config.politeness_delay;
        fp.validate();
        provider = std::make_unique<WebProvider>(fp, std::make_shared<FetchCache>(fs::path(config.cache_dir) / "fetch"));
    }
    const Query q = Query::make(query, "q-" + sha256_hex(query).substr(0, 12));
    if (corpus.empty()) seed_refs = seed_sources(q, seeds);

    std::unique_ptr<ContentFilter> filter;
    if (config.filter_mode == FilterMode::llm) {
        if (endpoint.empty()) throw ConfigError("--filter llm needs --llm-endpoint");
        LlmFilterConfig lc;
        lc.endpoint = endpoint;
        lc.model = model;
        auto client = std::make_shared<HttpChatClient>(endpoint, model, lc.temperature);
        auto replay = std::make_shared<ReplayCache>(fs::path(config.cache_dir) / "llm");
        filter = std::make_unique<LlmFilter>(lc, client, policy, replay, o.quiet ? nullptr : &std::cerr);
    } else {
        filter = std::make_unique<ExtractiveFilter>(policy);
    }

    UnionFusion fusion;
    Engine engine(config, *provider, *filter, fusion);
    if (!o.quiet) engine.set_log(&std::cerr);

    const std::string started = iso_now();
    const RunResult result = engine.run(q, seed_refs);
    const std::string finished = iso_now();

    const fs::path out(o.out);
    fs::create_directories(out);
    write_file(out / "container.json", dump_pretty(result.container));
    write_file(out / "trace.json", dump_pretty(result.trace));
    write_file(out / "report.txt", render_report(result.trace, result.container));
    json rm{{"config_file", o.config_file.empty() ? json() : json(o.config_file)},
            {"config", config},
            {"output_dir", out.string()},
            {"mode", corpus.empty() ? "seeds" : "corpus"},
            {"input", corpus.empty() ? seeds : corpus},
            {"llm_endpoint", endpoint.empty() ? json() : json(endpoint)},
            {"model", config.filter_mode == FilterMode::llm ? json(model) : json()},
            {"started_at", started},
            {"finished_at", finished}};
    write_file(out / "run_manifest.json", dump_pretty(rm));

    std::size_t failed = 0, layer0_ok = 0;
    for (const auto& l : result.trace.layers) {
        for (const auto& s : l.sources) {
            if (s.status != FetchStatus::ok) {
                ++failed;
                std::cerr << "warning: " << s.source.uri << ": " << to_string(s.status)
                          << (s.error.empty() ? "" : " (" + s.error + ")") << "\n";
            } else if (l.index == 0) {
                ++layer0_ok;
            }
        }
    }
    if (layer0_ok == 0) {
        std::cerr << "error: none of the " << seed_refs.size() << " seed sources could be fetched\n";
        return kExitUnfetchable;
    }
    if (failed > 0) std::cerr << "warning: " << failed << " source(s) could not be fetched\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

void print_prf(const std::string& name, const std::optional<Prf>& p) {
    if (!p) {
        std::cout << name << ": undefined (empty reference)\n";
        return;
    }
    std::cout << name << ": precision=" << fixed(p->precision) << " recall=" << fixed(p->recall)
              << " f1=" << fixed(p->f1) << "\n";
}

// ---------------------------------------------------------------------------
// sim

struct SimFlags {
    std::string spec_file, out, manifest, trace, container, threshold;
    int depth = 0, branching = 0, docs_per_layer = 0, sentences = 0, top_k = 2, max_layers = 8;
    double noise = 0, overlap = 0;
    std::uint64_t seed = 0;
    bool acceptance = false, quiet = false;
};

CorpusSpec spec_from_flags(const SimFlags& f, CLI::App& app) {
    const auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
    CorpusSpec spec = f.acceptance ? acceptance_spec() : CorpusSpec{};
    if (!f.spec_file.empty()) {
        try {
            spec = read_json(f.spec_file).get<CorpusSpec>();
        } catch (const json::exception& e) {
            throw ConfigError(f.spec_file + ": " + e.what());
        }
    }
    if (given("--depth")) spec.depth = f.depth;
    if (given("--branching")) spec.branching = f.branching;
    if (given("--docs-per-layer")) spec.docs_per_layer = f.docs_per_layer;
    if (given("--noise")) spec.noise_ratio = f.noise;
    if (given("--overlap")) spec.overlap_ratio = f.overlap;
    if (given("--seed")) spec.seed = f.seed;
    if (given("--sentences-per-doc")) spec.sentences_per_doc = f.sentences;
    spec.validate();
    return spec;
}

void add_spec_flags(CLI::App* cmd, SimFlags& f) {
    cmd->add_option("--spec", f.spec_file, "Corpus spec JSON file")->check(CLI::ExistingFile);
    cmd->add_flag("--acceptance", f.acceptance, "Start from the acceptance corpus spec");
    cmd->add_option("--depth", f.depth, "Number of layers");
    cmd->add_option("--branching", f.branching, "Links per document");
    cmd->add_option("--docs-per-layer", f.docs_per_layer, "Root documents");
    cmd->add_option("--noise", f.noise, "Fraction of noise sentences per document");
    cmd->add_option("--overlap", f.overlap, "Per-layer fraction of repeated relevant sentences");
    cmd->add_option("--seed", f.seed, "Generator seed");
    cmd->add_option("--sentences-per-doc", f.sentences, "Sentences per document");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query-driven layered knowledge extraction"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    // run
    RunOptions ro;
    auto* run = app.add_subcommand("run", "Explore sources for a query and write the knowledge container");
    run->add_option("--query", ro.query, "Query text");
    run->add_option("--seeds", ro.seeds, "Seed file: one locator per line");
    run->add_option("--corpus", ro.corpus, "Synthetic corpus manifest (offline mode)");
    run->add_option("--filter", ro.filter, "Content filter")->check(CLI::IsMember({"llm", "extractive"}));
    run->add_option("--llm-endpoint", ro.endpoint, "Chat-completion endpoint URL (key from WISE_LLM_API_KEY)");
    run->add_option("--model", ro.model, "Model id for the LLM filter");
    run->add_option("--threshold", ro.threshold, "Stop when the best layer score is below this (number or inf)");
    run->add_option("--top-k", ro.top_k, "Sources kept per layer");
    run->add_option("--max-layers", ro.max_layers, "Upper bound on explored layers");
    run->add_option("--stopwords", ro.stopwords, "none, builtin, or a stopword file");
    run->add_option("--cache-dir", ro.cache_dir, "Fetch and LLM replay cache directory");
    run->add_option("--out", ro.out, "Output directory");
    run->add_option("--seed", ro.seed, "Random seed recorded in the config");
    run->add_option("--config", ro.config_file, "JSON config file (flags take precedence)");
    run->add_option("--max-in-flight", ro.max_in_flight, "Concurrent source evaluations per layer");
    run->add_flag("--quiet", ro.quiet, "No progress output");

    // eval
    auto* eval = app.add_subcommand("eval", "Output comparison metrics");
    eval->require_subcommand(1);
    std::string cand, ref, systems_dir = "data/eval/systems", reference_file = "data/eval/reference.json",
                                       levels_dir = "data/eval/levels";
    int max_n = 4;
    bool as_json = false;
    auto* rouge = eval->add_subcommand("rouge", "ROUGE-1, ROUGE-2 and ROUGE-L between two text files");
    rouge->add_option("--candidate", cand, "Candidate text file")->required()->check(CLI::ExistingFile);
    rouge->add_option("--reference", ref, "Reference text file")->required()->check(CLI::ExistingFile);
    auto* bleu_cmd = eval->add_subcommand("bleu", "Sentence BLEU between two text files");
    bleu_cmd->add_option("--candidate", cand, "Candidate text file")->required()->check(CLI::ExistingFile);
    bleu_cmd->add_option("--reference", ref, "Reference text file")->required()->check(CLI::ExistingFile);
    bleu_cmd->add_option("--max-n", max_n, "Highest n-gram order");
    auto* recall_cmd = eval->add_subcommand("recall", "Entity recall of each system against the reference set");
    recall_cmd->add_option("--systems", systems_dir, "Directory of system output fixtures");
    recall_cmd->add_option("--reference", reference_file, "Reference set fixture");
    recall_cmd->add_flag("--json", as_json, "JSON output");
    auto* levels_cmd = eval->add_subcommand("levels", "Average level of detail per system");
    levels_cmd->add_option("--levels", levels_dir, "Directory of level annotation fixtures");
    levels_cmd->add_flag("--json", as_json, "JSON output");
    auto* matrix_cmd = eval->add_subcommand("matrix", "Average ROUGE/BLEU with each system as reference");
    matrix_cmd->add_option("--systems", systems_dir, "Directory of system output fixtures");
    matrix_cmd->add_flag("--json", as_json, "JSON output");

    // sim
    auto* sim = app.add_subcommand("sim", "Synthetic corpora");
    sim->require_subcommand(1);
    SimFlags sf;
    auto* gen = sim->add_subcommand("generate", "Write a corpus manifest");
    add_spec_flags(gen, sf);
    gen->add_option("--out", sf.out, "Manifest file")->required();
    auto* simrun = sim->add_subcommand("run", "Generate, run the engine and measure");
    add_spec_flags(simrun, sf);
    simrun->add_option("--manifest", sf.manifest, "Use an existing manifest instead of generating")
        ->check(CLI::ExistingFile);
    simrun->add_option("--threshold", sf.threshold, "Threshold (default scaled to the acceptance corpus)");
    simrun->add_option("--top-k", sf.top_k, "Sources kept per layer");
    simrun->add_option("--max-layers", sf.max_layers, "Upper bound on explored layers");
    simrun->add_option("--out", sf.out, "Directory for manifest, trace, container and measurement");
    simrun->add_flag("--quiet", sf.quiet, "No progress output");
    auto* meas = sim->add_subcommand("measure", "Measure a finished run against its manifest");
    meas->add_option("--manifest", sf.manifest, "Corpus manifest")->required()->check(CLI::ExistingFile);
    meas->add_option("--trace", sf.trace, "trace.json")->required()->check(CLI::ExistingFile);
    meas->add_option("--container", sf.container, "container.json")->required()->check(CLI::ExistingFile);

    // cache
    auto* cache = app.add_subcommand("cache", "Inspect or clear the fetch cache");
    cache->require_subcommand(1);
    std::string cache_dir = ".wise-cache";
    auto* cache_list = cache->add_subcommand("list", "List cached locators");
    cache_list->add_option("--cache-dir", cache_dir, "Cache directory");
    auto* cache_clear = cache->add_subcommand("clear", "Delete every cached entry");
    cache_clear->add_option("--cache-dir", cache_dir, "Cache directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(ro, *run);

        if (rouge->parsed()) {
            const auto c = read_file(cand), r = read_file(ref);
            print_prf("ROUGE-1", rouge_n(c, r, 1));
            print_prf("ROUGE-2", rouge_n(c, r, 2));
            print_prf("ROUGE-L", rouge_l(c, r));
            return kExitOk;
        }
        if (bleu_cmd->parsed()) {
            std::cout << "BLEU: " << fixed(bleu(read_file(cand), read_file(ref), max_n)) << "\n";
            return kExitOk;
        }
        if (recall_cmd->parsed()) {
            const auto outputs = load_system_outputs(systems_dir);
            const auto reference = load_reference(reference_file);
            const auto merged = union_reference(outputs, reference.aliases);
            json j = json::array();
            for (const auto& o : outputs) {
                const auto r = recall(o, reference);
                j.push_back(json{{"system", o.system}, {"recall", r ? json(*r) : json()}});
                if (!as_json) {
                    std::cout << std::left << std::setw(24) << o.system << (r ? fixed(*r, 3) : std::string("undefined"))
                              << "\n";
                }
            }
            if (as_json) {
                std::cout << dump_pretty(json{{"systems", j},
                                              {"reference_size", reference.canonical.size()},
                                              {"union_size", merged.canonical.size()}});
            } else {
                std::cout << "reference entities: " << reference.canonical.size()
                          << "  union of system entities: " << merged.canonical.size() << "\n";
            }
            return kExitOk;
        }
        if (levels_cmd->parsed()) {
            std::vector<fs::path> files;
            if (!fs::is_directory(levels_dir)) throw FixtureError(levels_dir, 0, "not a directory");
            for (const auto& e : fs::directory_iterator(levels_dir)) {
                if (e.path().extension() == ".json") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            json j = json::array();
            for (const auto& f : files) {
                const auto lv = load_levels(f);
                const auto avg = level_average(lv.annotations);
                j.push_back(json{{"system", lv.system}, {"entities", lv.annotations.size()},
                                 {"average", avg ? json(*avg) : json()}});
                if (!as_json) {
                    std::cout << std::left << std::setw(24) << lv.system
                              << (avg ? fixed(*avg, 2) : std::string("undefined")) << "  (" << lv.annotations.size()
                              << " entities)\n";
                }
            }
            if (as_json) std::cout << dump_pretty(j);
            return kExitOk;
        }
        if (matrix_cmd->parsed()) {
            const auto rows = cross_system_matrix(load_system_outputs(systems_dir));
            json j = json::array();
            if (!as_json) {
                std::cout << std::left << std::setw(24) << "reference" << std::setw(10) << "ROUGE-1" << std::setw(10)
                          << "ROUGE-2" << std::setw(10) << "ROUGE-L" << "BLEU\n";
            }
            for (const auto& r : rows) {
                j.push_back(json{{"reference", r.reference_system},
                                 {"rouge1", r.rouge1},
                                 {"rouge2", r.rouge2},
                                 {"rougeL", r.rougeL},
                                 {"bleu", r.bleu}});
                if (!as_json) {
                    std::cout << std::left << std::setw(24) << r.reference_system << std::setw(10) << fixed(r.rouge1)
                              << std::setw(10) << fixed(r.rouge2) << std::setw(10) << fixed(r.rougeL)
                              << fixed(r.bleu) << "\n";
                }
            }
            if (as_json) std::cout << dump_pretty(j);
            return kExitOk;
        }

        if (gen->parsed()) {
            const auto manifest = generate(spec_from_flags(sf, *gen));
            write_file(sf.out, dump_pretty(manifest));
            std::cout << "wrote " << manifest.documents.size() << " documents and " << manifest.facts.size()
                      << " facts to " << sf.out << "\n";
            return kExitOk;
        }
        if (simrun->parsed()) {
            const CorpusManifest manifest =
                sf.manifest.empty()
                    ? generate(spec_from_flags(sf, *simrun))
                    : load_manifest(sf.manifest);
            EngineConfig config;
            config.threshold = sf.threshold.empty() ? kAcceptanceThreshold : parse_threshold(sf.threshold);
            config.top_k = sf.top_k;
            config.max_layers = sf.max_layers;
            config.random_seed = manifest.spec.seed;
            SimProvider provider(manifest);
            ExtractiveFilter filter(TokenPolicy::scoring());
            UnionFusion fusion;
            Engine engine(config, provider, filter, fusion);
            if (!sf.quiet) engine.set_log(&std::cerr);
            const auto result = engine.run(Query::make(manifest.spec.query, "sim"), provider.roots());
            const auto m = measure(result.trace, result.container, manifest);
            if (!sf.out.empty()) {
                const fs::path out(sf.out);
                write_file(out / "manifest.json", dump_pretty(manifest));
                write_file(out / "trace.json", dump_pretty(result.trace));
                write_file(out / "container.json", dump_pretty(result.container));
                write_file(out / "measurement.json", dump_pretty(m));
            }
            std::cout << dump_pretty(m);
            return kExitOk;
        }
        if (meas->parsed()) {
            const auto manifest = load_manifest(sf.manifest);
            RunTrace trace;
            KnowledgeContainer container;
            try {
                trace = read_json(sf.trace).get<RunTrace>();
                container = read_json(sf.container).get<KnowledgeContainer>();
            } catch (const json::exception& e) {
                throw ConfigError(std::string("malformed trace or container: ") + e.what());
            }
            std::cout << dump_pretty(measure(trace, container, manifest));
            return kExitOk;
        }

        if (cache_list->parsed()) {
            FetchCache c(fs::path(cache_dir) / "fetch");
            for (const auto& uri : c.uris()) {
                const auto raw = c.get(uri);
                std::cout << (raw ? to_string(raw->status) : std::string_view("missing")) << "\t" << uri << "\n";
            }
            return kExitOk;
        }
        if (cache_clear->parsed()) {
            FetchCache c(fs::path(cache_dir) / "fetch");
            const auto n = c.uris().size();
            c.clear();
            const fs::path llm = fs::path(cache_dir) / "llm";
            if (fs::exists(llm)) fs::remove_all(llm);
            std::cout << "removed " << n << " cached documents\n";
            return kExitOk;
        }
    } catch (const FixtureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
