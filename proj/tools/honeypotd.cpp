// honeypotd.cpp — command-line front end.
//
// Subcommands:
//   serve            run the LDAP listener against a simulator or HTTP backend
//   capture extract  turn a pcap into a two-column request/response CSV
//   generate         synthesize a deterministic request/response dataset
//   eval             score predictions (--data) or obtain them first (--infer)
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "ldapot/capture.hpp"
#include "ldapot/directory.hpp"
#include "ldapot/evaluator.hpp"
#include "ldapot/interaction_log.hpp"
#include "ldapot/listener.hpp"
#include "ldapot/responder.hpp"

namespace {

using namespace ldapot;

// Post-parse flag problems (missing companion flags etc.); exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendFlags {
    std::string backend = "sim";
    std::string ldif;
    std::string endpoint_url;
    std::string mode = "auto";
    std::string base_dn;
    std::string language;
    std::string org_type;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
    cmd->add_option("--backend", flags.backend, "Responder backend")
        ->check(CLI::IsMember({"sim", "http"}))
        ->capture_default_str();
    cmd->add_option("--ldif", flags.ldif, "Directory seed for the sim backend");
    cmd->add_option("--endpoint-url", flags.endpoint_url,
                    "HTTP backend endpoint, e.g. http://host:5000/receive_data");
    cmd->add_option("--mode", flags.mode, "Context hint mode for the HTTP backend")
        ->check(CLI::IsMember({"auto", "manual"}))
        ->capture_default_str();
    cmd->add_option("--base-dn", flags.base_dn, "Directory suffix hint (manual mode)");
    cmd->add_option("--language", flags.language, "Content language hint (manual mode)");
    cmd->add_option("--org-type", flags.org_type, "Organization type hint (manual mode)");
}

std::shared_ptr<Responder> make_backend(const BackendFlags& flags) {
    if (flags.backend == "sim") {
        if (flags.ldif.empty()) throw UsageError("--backend sim requires --ldif");
        return std::make_shared<SimResponder>(load_directory_file(flags.ldif));
    }
    if (flags.endpoint_url.empty())
        throw UsageError("--backend http requires --endpoint-url");

    ResponderContext context;
    context.mode = flags.mode == "manual" ? ResponderContext::Mode::Manual
                                          : ResponderContext::Mode::Automatic;
    if (!flags.base_dn.empty()) context.base_dn = flags.base_dn;
    if (!flags.language.empty()) context.language = flags.language;
    if (!flags.org_type.empty()) context.organization_type = flags.org_type;
    if (context.mode == ResponderContext::Mode::Manual) {
        if (flags.base_dn.empty()) throw UsageError("--mode manual requires --base-dn");
        if (flags.language.empty()) throw UsageError("--mode manual requires --language");
        if (flags.org_type.empty()) throw UsageError("--mode manual requires --org-type");
    }
    context.validate();

    BridgeConfig config;
    config.endpoint_url = flags.endpoint_url;
    config.validate();
    return std::make_shared<BridgeResponder>(config, context);
}

// ------------------------------------------------------------------- serve

struct ServeFlags {
    std::string listen = "0.0.0.0";
    int port = 389;
    std::string log_path = "ldap_interactions.jsonl";
    BackendFlags backend;
};

int run_serve(const ServeFlags& flags) {
    // Block the shutdown signals before any thread exists so every thread
    // inherits the mask and sigwait below is the sole consumer.
    block_shutdown_signals();

    std::shared_ptr<Responder> backend = make_backend(flags.backend);
    auto log = std::make_shared<InteractionLog>(flags.log_path);

    ListenerConfig config;
    config.bind_address = flags.listen;
    config.port = flags.port;
    Listener listener(config, backend, log);
    listener.start();
    std::cout << "listening on " << flags.listen << ":" << listener.port() << " (backend "
              << backend->label() << ", log " << flags.log_path << ")" << std::endl;

    const int signal_number = wait_for_shutdown_signal();
    std::cout << "signal " << signal_number << " received, draining sessions" << std::endl;
    listener.stop();
    std::cout << "sessions=" << listener.sessions_accepted()
              << " frames_in=" << listener.frames_received()
              << " frames_out=" << listener.frames_sent()
              << " log_records=" << log->records_written() << std::endl;
    return 0;
}

// --------------------------------------------------------------- reporting

void emit_report(const eval::EvalReport& report, const std::string& report_path) {
    std::cout << eval::report_to_text(report);
    if (report_path.empty()) return;
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + report_path);
    out << eval::report_to_json(report).dump(2) << "\n";
    if (!out.flush()) throw std::runtime_error("short write to report: " + report_path);
    std::cout << "report written to " << report_path << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Protocol-faithful LDAP honeypot toolkit"};
    app.require_subcommand(1);

    // serve -----------------------------------------------------------------
    ServeFlags serve_flags;
    CLI::App* serve = app.add_subcommand("serve", "Run the LDAP listener");
    serve->add_option("--listen", serve_flags.listen, "Bind address")
        ->capture_default_str();
    serve->add_option("--port", serve_flags.port, "TCP port (0 picks an ephemeral port)")
        ->check(CLI::Range(0, 65535))
        ->capture_default_str();
    serve->add_option("--log", serve_flags.log_path, "Interaction log path (JSON lines)")
        ->capture_default_str();
    add_backend_flags(serve, serve_flags.backend);

    // capture extract -------------------------------------------------------
    std::string pcap_path;
    int server_port = 389;
    std::string extract_out;
    CLI::App* capture = app.add_subcommand("capture", "Work with packet captures");
    capture->require_subcommand(1);
    CLI::App* extract =
        capture->add_subcommand("extract", "Extract request/response pairs from a pcap");
    extract->add_option("--pcap", pcap_path, "Classic pcap file")
        ->required()
        ->check(CLI::ExistingFile);
    extract->add_option("--server-port", server_port, "LDAP server port in the capture")
        ->check(CLI::Range(1, 65535))
        ->capture_default_str();
    extract->add_option("--out-csv", extract_out, "Two-column dataset destination")
        ->required();

    // generate --------------------------------------------------------------
    std::string generate_ldif;
    std::uint32_t seed = 1;
    int count = 328;
    std::string generate_out;
    std::string mix = "traffic";
    double failure_ratio = 0.2;
    CLI::App* generate =
        app.add_subcommand("generate", "Synthesize a request/response dataset");
    generate->add_option("--ldif", generate_ldif, "Directory seed")
        ->required()
        ->check(CLI::ExistingFile);
    generate->add_option("--seed", seed, "Random seed")->capture_default_str();
    generate->add_option("--count", count, "Number of pairs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    generate->add_option("--out-csv", generate_out, "Two-column dataset destination")
        ->required();
    generate->add_option("--mix", mix, "Operation mix preset")
        ->check(CLI::IsMember({"traffic", "evaluation"}))
        ->capture_default_str();
    generate->add_option("--failure-ratio", failure_ratio, "Share of failing requests")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    // eval ------------------------------------------------------------------
    bool eval_infer = false;
    bool eval_data = false;
    std::string eval_in;
    std::string eval_out;
    std::string report_path;
    int concurrency = 1;
    BackendFlags eval_backend;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Score predicted responses");
    eval_cmd->add_flag("--infer", eval_infer,
                       "Obtain predictions from a backend, then score them");
    eval_cmd->add_flag("--data", eval_data, "Score an existing three-column CSV");
    eval_cmd->add_option("--in-csv", eval_in, "Input dataset")->required()->check(
        CLI::ExistingFile);
    eval_cmd->add_option("--out-csv", eval_out,
                         "Destination for the three-column CSV written by --infer");
    eval_cmd->add_option("--report", report_path, "JSON report destination");
    eval_cmd->add_option("--concurrency", concurrency, "Concurrent backend calls (--infer)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_backend_flags(eval_cmd, eval_backend);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the offending flag
        return code == 0 ? 0 : 1;
    }

    try {
        if (serve->parsed()) return run_serve(serve_flags);

        if (extract->parsed()) {
            const auto flows = extract_ldap_streams_file(pcap_path, server_port);
            std::vector<CapturedPair> pairs;
            int diagnostics = 0;
            for (const FlowStreams& flow : flows) {
                PairingResult paired = pair_messages(flow);
                for (const std::string& note : paired.diagnostics) {
                    std::cerr << flow.id() << ": " << note << "\n";
                    ++diagnostics;
                }
                pairs.insert(pairs.end(), paired.pairs.begin(), paired.pairs.end());
            }
            const int rows = write_dataset_csv_file(pairs, extract_out);
            std::cout << flows.size() << " flow(s), " << rows << " pair(s), " << diagnostics
                      << " diagnostic(s) -> " << extract_out << std::endl;
            return 0;
        }

        if (generate->parsed()) {
            Directory directory = load_directory_file(generate_ldif);
            const OperationDistribution distribution = mix == "evaluation"
                                                           ? OperationDistribution::evaluation()
                                                           : OperationDistribution::traffic();
            GenerateOptions options;
            options.failure_ratio = failure_ratio;
            const auto pairs =
                generate_synthetic_dataset(directory, distribution, seed, count, options);
            const int rows = write_dataset_csv_file(pairs, generate_out);
            std::cout << rows << " pair(s) -> " << generate_out << std::endl;
            return 0;
        }

        if (eval_cmd->parsed()) {
            if (eval_infer == eval_data)
                throw UsageError("pass exactly one of --infer or --data");
            eval::EvalReport report;
            if (eval_data) {
                report = eval::evaluate_dataset(eval::read_eval_csv_file(eval_in));
            } else {
                const auto dataset = read_dataset_csv_file(eval_in);
                std::shared_ptr<Responder> backend = make_backend(eval_backend);
                eval::InferOptions options;
                options.concurrency = concurrency;
                const auto rows = eval::infer_dataset(dataset, *backend, options);
                if (!eval_out.empty()) eval::write_eval_csv_file(rows, eval_out);
                report = eval::evaluate_dataset(rows);
            }
            emit_report(report, report_path);
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
