#include "ldapot/interaction_log.hpp"

#include <cstdio>
#include <ctime>
#include <iostream>
#include <stdexcept>

namespace ldapot {

Json InteractionRecord::to_json() const {
    Json doc = Json::object();
    doc["timestamp"] = timestamp;
    doc["client_ip"] = client_ip;
    doc["client_port"] = client_port;
    doc["backend"] = backend;
    doc["latency_ms"] = latency_ms;
    doc["request"] = request;
    doc["responses"] = responses;
    doc["repair_actions"] = repair_actions;
    return doc;
}

InteractionRecord InteractionRecord::from_json(const Json& line) {
    InteractionRecord record;
    record.timestamp = line.at("timestamp").get<std::string>();
    record.client_ip = line.at("client_ip").get<std::string>();
    record.client_port = line.at("client_port").get<int>();
    record.backend = line.at("backend").get<std::string>();
    record.latency_ms = line.at("latency_ms").get<std::int64_t>();
    record.request = line.at("request");
    record.responses.assign(line.at("responses").begin(), line.at("responses").end());
    record.repair_actions =
        line.at("repair_actions").get<std::vector<std::string>>();
    return record;
}

std::string format_utc_timestamp_ms(std::chrono::system_clock::time_point instant) {
    using namespace std::chrono;
    const auto since_epoch = duration_cast<milliseconds>(instant.time_since_epoch());
    const std::time_t seconds = static_cast<std::time_t>(since_epoch.count() / 1000);
    const int millis = static_cast<int>(since_epoch.count() % 1000);

    std::tm parts{};
    gmtime_r(&seconds, &parts);
    char buffer[40];
    const std::size_t n = std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%S", &parts);
    char out[48];
    std::snprintf(out, sizeof out, "%.*s.%03dZ", static_cast<int>(n), buffer, millis);
    return out;
}

InteractionLog::InteractionLog(std::filesystem::path path, std::uintmax_t rotate_bytes)
    : path_(std::move(path)), rotate_bytes_(rotate_bytes) {
    // Continue any numbering an earlier run left behind.
    while (std::filesystem::exists(path_.string() + "." + std::to_string(rotation_counter_ + 1)))
        ++rotation_counter_;
    open_sink();
}

void InteractionLog::open_sink() {
    out_.open(path_, std::ios::app | std::ios::binary);
    std::error_code ec;
    const std::uintmax_t existing = std::filesystem::file_size(path_, ec);
    current_bytes_ = ec ? 0 : existing;
}

void InteractionLog::rotate_locked() {
    out_.close();
    ++rotation_counter_;
    std::error_code ec;
    std::filesystem::rename(path_, path_.string() + "." + std::to_string(rotation_counter_), ec);
    if (ec) {
        std::cerr << "interaction log: rotation failed: " << ec.message() << "\n";
        --rotation_counter_;
    }
    open_sink();
}

bool InteractionLog::append(const InteractionRecord& record) {
    const std::string line = record.to_json().dump() + "\n";

    std::lock_guard lock(mutex_);
    if (current_bytes_ > 0 && current_bytes_ + line.size() > rotate_bytes_) rotate_locked();
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) {
        std::cerr << "interaction log: write to " << path_ << " failed; record dropped\n";
        out_.clear();
        return false;
    }
    current_bytes_ += line.size();
    ++records_;
    return true;
}

std::uint64_t InteractionLog::records_written() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::vector<InteractionRecord> read_interaction_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open interaction log: " + path.string());

    std::vector<InteractionRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const bool final_line = in.peek() == std::ifstream::traits_type::eof();
        try {
            records.push_back(InteractionRecord::from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            if (final_line) break;  // crash-truncated tail is the one tolerated defect
            throw std::runtime_error("interaction log " + path.string() +
                                     " has a corrupt interior line: " + e.what());
        }
    }
    return records;
}

}  // namespace ldapot
