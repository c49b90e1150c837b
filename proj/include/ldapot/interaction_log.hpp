#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "ldapot/json_codec.hpp"

namespace ldapot {

// One request/response interaction as observed by the listener. Silent
// operations (unbind, abandon) still produce a record with empty responses.
struct InteractionRecord {
    std::string timestamp;  // UTC instant, ISO-8601 with millisecond precision
    std::string client_ip;
    int client_port = 0;
    Json request;
    std::vector<Json> responses;
    std::string backend;
    std::int64_t latency_ms = 0;
    std::vector<std::string> repair_actions;

    Json to_json() const;
    static InteractionRecord from_json(const Json& line);

    bool operator==(const InteractionRecord&) const = default;
};

std::string format_utc_timestamp_ms(std::chrono::system_clock::time_point instant);

// Append-only JSON-lines sink shared by all sessions. Every append writes and
// flushes exactly one self-contained line; writes are serialized so concurrent
// sessions never interleave partial lines. When the current file would exceed
// rotate_bytes the log rotates to "<path>.<n>" with increasing n.
class InteractionLog {
public:
    static constexpr std::uintmax_t kDefaultRotateBytes = 64ull * 1024 * 1024;

    explicit InteractionLog(std::filesystem::path path,
                            std::uintmax_t rotate_bytes = kDefaultRotateBytes);

    // Returns false (after a console warning) when the sink is unwritable;
    // logging failure must never take the service down.
    bool append(const InteractionRecord& record);

    std::uint64_t records_written() const;
    const std::filesystem::path& path() const { return path_; }

private:
    void open_sink();
    void rotate_locked();

    std::filesystem::path path_;
    std::uintmax_t rotate_bytes_;
    std::ofstream out_;
    std::uintmax_t current_bytes_ = 0;
    int rotation_counter_ = 0;
    std::uint64_t records_ = 0;
    mutable std::mutex mutex_;
};

// Read a JSON-lines interaction log back. A truncated or unparseable final
// line (crash artifact) is skipped; garbage anywhere else throws.
std::vector<InteractionRecord> read_interaction_log(const std::filesystem::path& path);

}  // namespace ldapot
