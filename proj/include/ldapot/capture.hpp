#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldapot/directory.hpp"

namespace ldapot {

// Raised for capture containers this parser does not read (pcapng, exotic
// link types); the message names the offending file offset.
struct UnsupportedCapture : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Concatenated per-direction TCP payloads of one client<->server connection.
struct FlowStreams {
    std::string client_ip;
    int client_port = 0;
    std::string server_ip;
    int server_port = 0;
    std::string client_to_server;
    std::string server_to_client;
    double first_seen = 0.0;  // capture timestamp of the flow's first packet

    std::string id() const;  // "client_ip:client_port->server_ip:server_port"
};

// Classic pcap only (micro/nanosecond magics, either byte order), Ethernet
// link type, IPv4+TCP. Packets for other ports/protocols are ignored; flows
// come back in first-seen order.
std::vector<FlowStreams> extract_ldap_streams(std::string_view capture, int server_port);
std::vector<FlowStreams> extract_ldap_streams_file(const std::filesystem::path& path,
                                                   int server_port);

// One dataset row: a request document and the newline-joined response
// documents that answered it (empty for unbind/abandon).
struct CapturedPair {
    std::string input;
    std::string output;
    std::string flow_id;       // "synthetic" for generated pairs
    double timestamp = 0.0;

    bool operator==(const CapturedPair&) const = default;
};

struct PairingResult {
    std::vector<CapturedPair> pairs;        // in client request order
    std::vector<std::string> diagnostics;   // orphan responses, undecodable bytes
};

// Match each decoded request with the responses that share its messageID.
// When an id is reused, responses attach to the earliest not-yet-completed
// request with that id (a terminal response completes its request).
PairingResult pair_messages(std::string_view client_stream, std::string_view server_stream);
PairingResult pair_messages(const FlowStreams& flow);

// Two-column dataset: header "input,output", one RFC-4180 quoted row per
// pair. Returns the number of data rows written.
int write_dataset_csv(const std::vector<CapturedPair>& pairs, std::ostream& out);
int write_dataset_csv_file(const std::vector<CapturedPair>& pairs,
                           const std::filesystem::path& path);

// Read a two-column dataset back (header required).
std::vector<CapturedPair> read_dataset_csv_file(const std::filesystem::path& path);

// Canonical operation-class order used everywhere counts or weights appear.
inline constexpr std::array<const char*, 8> kOperationClasses = {
    "queries",   "authentications", "modifications", "comparisons",
    "creations", "deletions",       "extended",      "moves"};

// Share of each operation class, in percent.
struct OperationDistribution {
    double queries = 43.12;
    double authentications = 40.67;
    double modifications = 7.34;
    double comparisons = 4.28;
    double creations = 1.83;
    double deletions = 1.53;
    double extended = 0.92;
    double moves = 0.31;

    // The default: the mix observed in live directory traffic.
    static OperationDistribution traffic() { return {}; }
    // The mix used when building evaluation datasets (heavier on binds,
    // no moves).
    static OperationDistribution evaluation();

    std::vector<double> as_weights() const;  // kOperationClasses order
    void validate() const;                   // non-negative, sums to 100 +- 0.01
};

// Apportion n items to weights (percent): floor the exact shares, then hand
// leftover units to the largest fractional parts (ties to the earlier class).
std::vector<int> largest_remainder_counts(const std::vector<double>& weights_percent, int n);

struct GenerateOptions {
    double failure_ratio = 0.2;  // share of requests built to fail
};

// Deterministically synthesize n request/response pairs against the
// directory: class counts follow the distribution exactly (largest-remainder),
// requests are drawn from the directory's current contents, and outputs come
// from the simulator, so the directory mutates along the way. Identical
// (directory, distribution, seed, n) give byte-identical pairs.
std::vector<CapturedPair> generate_synthetic_dataset(Directory& directory,
                                                     const OperationDistribution& distribution,
                                                     std::uint32_t seed, int n,
                                                     const GenerateOptions& options = {});

}  // namespace ldapot
