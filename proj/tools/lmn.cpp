// lmn: NLACP -> MESP conversion, evaluation and service front end.
//
//   lmn convert --mode lmn1|lmn2 --nlacp FILE [--attributes FILE] [--prompt N]
//               [--backend mock|openai] [--out ZIP] [--emit-raw]
//   lmn eval rouge --candidate FILE --reference FILE [--n 1|2] [--lcs]
//   lmn eval bertscore --candidate FILE --reference FILE --embeddings LEXICON|URL
//   lmn eval extract --generated DIR --gold DIR
//   lmn bench --samples DIR --backend mock|openai --out CSV
//   lmn serve [--bind HOST:PORT] [--backend mock|openai] [--static DIR]
//   lmn prompts [--show N --mode lmn1|lmn2]
//
// Exit codes: 0 success, 2 input errors, 3 backend errors.

#include "lmn/lmn.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitBackend = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    auto s = ss.str();
    if (!lmn::text::is_valid_utf8(s)) throw InputError("'" + path.string() + "' is not valid UTF-8");
    return s;
}

void write_file(const fs::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << x;
    return os.str();
}

struct BackendOptions {
    std::string backend = "mock";
    std::string model;
    std::string endpoint;

    lmn::CompletionConfig config() const {
        lmn::CompletionConfig c;
        c.apply_environment();
        if (!model.empty()) c.model_name = model;
        if (!endpoint.empty()) c.endpoint_url = endpoint;
        return c;
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--backend", backend, "Completion backend")->check(CLI::IsMember({"mock", "openai"}));
        cmd->add_option("--model", model, "Model name (openai backend)");
        cmd->add_option("--endpoint", endpoint, "Endpoint base URL (default $LMN_ENDPOINT or OpenAI)");
    }
};

void print_scores(std::ostream& os, const std::vector<std::pair<std::string, lmn::eval::ScoreTriple>>& rows) {
    os << std::left << std::setw(12) << "metric" << std::setw(12) << "precision" << std::setw(12) << "recall"
       << "f1\n";
    for (const auto& [name, s] : rows)
        os << std::setw(12) << name << std::setw(12) << fmt(s.precision) << std::setw(12) << fmt(s.recall)
           << fmt(s.f1) << '\n';
}

std::string scores_csv(const std::vector<std::pair<std::string, lmn::eval::ScoreTriple>>& rows) {
    std::ostringstream os;
    os << "metric,precision,recall,f1\n" << std::setprecision(17);
    for (const auto& [name, s] : rows) os << name << ',' << s.precision << ',' << s.recall << ',' << s.f1 << '\n';
    return os.str();
}

void emit_csv(const std::string& csv_path, const std::string& csv) {
    if (csv_path.empty()) return;
    if (csv_path == "-")
        std::cout << '\n' << csv;
    else
        write_file(csv_path, csv);
}

int run_convert(const std::string& mode_text, const fs::path& nlacp_path, const std::string& attributes_path,
                int prompt, const BackendOptions& backend_opts, const fs::path& out_path, bool emit_raw) {
    lmn::ConversionRequest req;
    req.mode = lmn::parse_mode(mode_text);
    req.nlacp_text = read_file(nlacp_path);
    if (!attributes_path.empty()) req.attributes_text = read_file(attributes_path);
    req.prompt_number = prompt;
    req.completion_config = backend_opts.config();

    const auto backend = lmn::make_backend(lmn::parse_backend_kind(backend_opts.backend));
    const auto out = lmn::run_conversion(req, *backend);

    write_file(out_path, lmn::package_zip(out));
    if (emit_raw) {
        auto raw_path = out_path;
        raw_path.replace_extension(".raw.txt");
        write_file(raw_path, out.raw_model_text);
        std::cout << "raw model output: " << raw_path.string() << '\n';
    }
    for (const auto& d : out.input_diagnostics) std::cerr << "attributes " << d << '\n';
    for (const auto& d : out.diagnostics) std::cerr << "model output " << d << '\n';
    std::cout << "rules: " << out.policy.size() << ", diagnostics: " << out.diagnostics.size() << " ("
              << lmn::count_errors(out.diagnostics) << " errors)\n"
              << "timing: total " << fmt(std::chrono::duration<double, std::milli>(out.timing.total).count())
              << " ms, llm " << fmt(std::chrono::duration<double, std::milli>(out.timing.llm).count()) << " ms\n"
              << "wrote " << out_path.string() << '\n';
    return 0;
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view suffix) {
    if (!fs::is_directory(dir)) throw InputError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.size() >= suffix.size() && name.ends_with(suffix)) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

int run_extract(const fs::path& generated_dir, const fs::path& gold_dir, const std::vector<std::string>& keys,
                const std::string& csv_path) {
    std::vector<lmn::Policy> generated;
    std::vector<lmn::eval::GoldSample> gold;
    for (const auto& gold_file : sorted_files(gold_dir, ".txt")) {
        const auto gen_file = generated_dir / gold_file.filename();
        if (!fs::exists(gen_file)) throw InputError("no generated file for gold sample '" + gold_file.filename().string() + "'");
        generated.push_back(lmn::parse_mesp(read_file(gen_file)).policy);
        gold.push_back(lmn::eval::parse_gold(read_file(gold_file)));
    }
    if (gold.empty()) throw InputError("no gold samples (*.txt) in '" + gold_dir.string() + "'");
    const auto report = lmn::eval::score_attribute_extraction(generated, gold, keys);

    std::cout << std::left << std::setw(14) << "attribute" << "correct / samples\n";
    std::ostringstream csv;
    csv << "attribute,correct,samples\n";
    for (const auto& [k, n] : report.per_attribute_counts) {
        std::cout << std::setw(14) << k << n << " / " << report.sample_count << '\n';
        csv << k << ',' << n << ',' << report.sample_count << '\n';
    }
    emit_csv(csv_path, csv.str());
    return 0;
}

int run_bench(const fs::path& samples_dir, const BackendOptions& backend_opts, int prompt, const fs::path& out_csv,
              bool parallel) {
    std::vector<lmn::eval::BenchmarkCase> cases;
    const auto config = backend_opts.config();
    std::size_t sample = 0;
    for (const auto& nlacp_file : sorted_files(samples_dir, ".nlacp.txt")) {
        ++sample;
        const auto name = nlacp_file.filename().string();
        const auto stem = name.substr(0, name.size() - std::string_view(".nlacp.txt").size());
        const auto nlacp = read_file(nlacp_file);

        lmn::eval::BenchmarkCase one{sample, {lmn::Mode::LMN1, nlacp, std::nullopt, prompt, config}};
        cases.push_back(one);
        const auto attrs_file = samples_dir / (stem + ".attributes.txt");
        if (fs::exists(attrs_file))
            cases.push_back({sample, {lmn::Mode::LMN2, nlacp, read_file(attrs_file), prompt, config}});
    }
    if (cases.empty()) throw InputError("no samples (*.nlacp.txt) in '" + samples_dir.string() + "'");

    const auto backend = lmn::make_backend(lmn::parse_backend_kind(backend_opts.backend));
    const auto rows = lmn::eval::benchmark_conversion(cases, *backend, parallel);

    std::cout << std::left << std::setw(8) << "sample" << std::setw(7) << "mode" << std::setw(14) << "total_ms"
              << std::setw(14) << "llm_ms" << "status\n";
    std::size_t failed = 0;
    for (const auto& r : rows) {
        std::cout << std::setw(8) << r.sample << std::setw(7) << lmn::to_string(r.mode) << std::setw(14)
                  << fmt(std::chrono::duration<double, std::milli>(r.total).count()) << std::setw(14)
                  << fmt(std::chrono::duration<double, std::milli>(r.llm).count())
                  << (r.ok ? "ok" : "failed: " + r.error) << '\n';
        if (!r.ok) ++failed;
    }
    if (parallel) std::cout << "note: samples ran in parallel; timings include contention\n";
    write_file(out_csv, lmn::eval::benchmark_csv(rows));
    std::cout << "wrote " << out_csv.string() << '\n';
    return failed == rows.size() ? kExitBackend : 0;
}

lmn::Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lmn - natural-language access control policies to ABAC rules"};
    app.set_version_flag("--version", std::string(lmn::kVersion));
    app.require_subcommand(1);

    // convert
    auto* convert = app.add_subcommand("convert", "Convert an NLACP file into MESP.txt + gpt_attribute.txt (ZIP)");
    std::string mode;
    fs::path nlacp_path;
    std::string attributes_path;
    int prompt = lmn::kDefaultPrompt;
    fs::path out_path = "lmn_output.zip";
    bool emit_raw = false;
    BackendOptions convert_backend;
    convert->add_option("--mode", mode, "lmn1 (policy only) or lmn2 (policy + attributes)")
        ->required()
        ->check(CLI::IsMember({"lmn1", "lmn2"}));
    convert->add_option("--nlacp", nlacp_path, "Natural-language policy file")->required();
    convert->add_option("--attributes", attributes_path, "Attributes file (lmn2)");
    convert->add_option("--prompt", prompt, "Prompt number")->check(CLI::Range(1, lmn::kPromptCount));
    convert->add_option("--out", out_path, "Output ZIP path");
    convert->add_flag("--emit-raw", emit_raw, "Also write the raw model reply next to the ZIP");
    convert_backend.add_to(convert);

    // eval
    auto* eval = app.add_subcommand("eval", "Score generated policies against references");
    eval->require_subcommand(1);

    auto* rouge = eval->add_subcommand("rouge", "ROUGE-N / ROUGE-L between two text files");
    fs::path candidate_path, reference_path;
    std::vector<int> rouge_n;
    bool rouge_lcs = false;
    std::string csv_path;
    rouge->add_option("--candidate", candidate_path, "Generated text")->required();
    rouge->add_option("--reference", reference_path, "Reference text")->required();
    rouge->add_option("--n", rouge_n, "N-gram order(s); default 1 and 2")->check(CLI::PositiveNumber);
    rouge->add_flag("--lcs", rouge_lcs, "Report ROUGE-L");
    rouge->add_option("--csv", csv_path, "Also write CSV to this path ('-' for stdout)");

    auto* bert = eval->add_subcommand("bertscore", "BERTScore with supplied token embeddings");
    std::string embeddings;
    std::string embedding_model = "text-embedding-3-small";
    bert->add_option("--candidate", candidate_path, "Generated text")->required();
    bert->add_option("--reference", reference_path, "Reference text")->required();
    bert->add_option("--embeddings", embeddings, "Lexicon file (token v1 .. vd) or http(s) embeddings endpoint")
        ->required();
    bert->add_option("--embedding-model", embedding_model, "Model name sent to an embeddings endpoint");
    bert->add_option("--csv", csv_path, "Also write CSV to this path ('-' for stdout)");

    auto* extract = eval->add_subcommand("extract", "Per-attribute correct-extraction counts");
    fs::path generated_dir, gold_dir;
    std::vector<std::string> keys = lmn::eval::default_tracked_keys();
    extract->add_option("--generated", generated_dir, "Directory of generated MESP files (NAME.txt)")->required();
    extract->add_option("--gold", gold_dir, "Directory of gold files (NAME.txt, 'Key: v1, v2' lines)")->required();
    extract->add_option("--keys", keys, "Tracked attribute keys");
    extract->add_option("--csv", csv_path, "Also write CSV to this path ('-' for stdout)");

    // bench
    auto* bench = app.add_subcommand("bench", "Time conversions over a sample directory");
    fs::path samples_dir, bench_out;
    bool parallel = false;
    BackendOptions bench_backend;
    bench->add_option("--samples", samples_dir, "Directory of NAME.nlacp.txt [+ NAME.attributes.txt]")->required();
    bench->add_option("--out", bench_out, "CSV output path")->required();
    bench->add_option("--prompt", prompt, "Prompt number")->check(CLI::Range(1, lmn::kPromptCount));
    bench->add_flag("--parallel", parallel, "Run samples concurrently (timings not comparable)");
    bench_backend.add_to(bench);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string bind;
    std::string serve_backend;
    std::string static_dir;
    std::size_t max_upload = 1u << 20;
    std::size_t concurrency = 8;
    serve->add_option("--bind", bind, "host:port (default $LMN_BIND or 127.0.0.1:8080)");
    serve->add_option("--backend", serve_backend, "mock or openai (default $LMN_BACKEND or mock)")
        ->check(CLI::IsMember({"mock", "openai"}));
    serve->add_option("--static", static_dir, "Directory of web assets served at /");
    serve->add_option("--max-upload", max_upload, "Per-file upload limit in bytes")->check(CLI::PositiveNumber);
    serve->add_option("--concurrency", concurrency, "Concurrent request limit")->check(CLI::PositiveNumber);

    // prompts
    auto* prompts = app.add_subcommand("prompts", "List or print prompt templates");
    int show = 0;
    std::string show_mode = "lmn2";
    prompts->add_option("--show", show, "Print template N in full")->check(CLI::Range(1, lmn::kPromptCount));
    prompts->add_option("--mode", show_mode, "Mode for --show")->check(CLI::IsMember({"lmn1", "lmn2"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*convert) {
            return run_convert(mode, nlacp_path, attributes_path, prompt, convert_backend, out_path, emit_raw);
        }
        if (*rouge) {
            const auto cand = lmn::eval::tokenize(read_file(candidate_path));
            const auto ref = lmn::eval::tokenize(read_file(reference_path));
            std::vector<std::pair<std::string, lmn::eval::ScoreTriple>> rows;
            if (rouge_n.empty() && !rouge_lcs) rouge_n = {1, 2};
            for (int n : rouge_n)
                rows.emplace_back("rouge-" + std::to_string(n), lmn::eval::rouge_n(cand, ref, static_cast<std::size_t>(n)));
            if (rouge_lcs || rouge->count("--n") == 0) rows.emplace_back("rouge-l", lmn::eval::rouge_l(cand, ref));
            print_scores(std::cout, rows);
            emit_csv(csv_path, scores_csv(rows));
            return 0;
        }
        if (*bert) {
            std::unique_ptr<lmn::eval::EmbeddingProvider> provider;
            if (embeddings.starts_with("http://") || embeddings.starts_with("https://")) {
                lmn::CompletionConfig transport;
                transport.apply_environment();
                transport.endpoint_url = embeddings;
                provider = std::make_unique<lmn::eval::HttpEmbeddings>(transport, embedding_model);
            } else {
                provider = std::make_unique<lmn::eval::LexiconEmbeddings>(
                    lmn::eval::LexiconEmbeddings::parse(read_file(embeddings)));
            }
            const auto cand = provider->embed(lmn::eval::tokenize(read_file(candidate_path)));
            const auto ref = provider->embed(lmn::eval::tokenize(read_file(reference_path)));
            if (!cand.missing.empty() || !ref.missing.empty())
                std::cerr << "warning: " << cand.missing.size() + ref.missing.size()
                          << " token(s) without an embedding were skipped\n";
            const auto score = lmn::eval::bert_score(cand.sequence, ref.sequence);
            std::vector<std::pair<std::string, lmn::eval::ScoreTriple>> rows{{"bertscore", score}};
            print_scores(std::cout, rows);
            emit_csv(csv_path, scores_csv(rows));
            return 0;
        }
        if (*extract) return run_extract(generated_dir, gold_dir, keys, csv_path);
        if (*bench) return run_bench(samples_dir, bench_backend, prompt, bench_out, parallel);
        if (*serve) {
            lmn::ServiceConfig config;
            config.apply_environment();
            if (!bind.empty()) config.set_bind(bind);
            if (!serve_backend.empty()) config.backend = lmn::parse_backend_kind(serve_backend);
            if (!static_dir.empty()) config.static_dir = static_dir;
            config.max_upload_bytes = max_upload;
            config.request_concurrency_limit = concurrency;
            lmn::Service service(config);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "lmn " << lmn::kVersion << " serving on " << config.host << ':' << config.port
                      << " (backend " << lmn::to_string(config.backend) << ", status "
                      << service.health().at("status").get<std::string>() << ")\n"
                      << std::flush;
            const bool ok = service.listen();
            g_service = nullptr;
            if (!ok) {
                std::cerr << "error: could not listen on " << config.host << ':' << config.port << '\n';
                return kExitInput;
            }
            return 0;
        }
        if (*prompts) {
            if (show) {
                std::cout << lmn::prompt_template(lmn::PromptId(show, lmn::parse_mode(show_mode))).text << '\n';
                return 0;
            }
            for (const auto& p : lmn::list_prompts()) {
                auto preview = std::string(p.text.substr(0, 80));
                std::replace(preview.begin(), preview.end(), '\n', ' ');
                std::cout << p.id.number() << ' ' << lmn::to_string(p.id.mode()) << "  " << preview << '\n';
            }
            return 0;
        }
    } catch (const lmn::LlmError& e) {
        std::cerr << "backend error: " << e.what() << '\n';
        return e.kind() == lmn::ErrorKind::Precondition ? kExitInput : kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
