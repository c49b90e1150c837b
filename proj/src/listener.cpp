#include "ldapot/listener.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstring>
#include <iostream>
#include <span>

#include "ldapot/ber.hpp"
#include "ldapot/message.hpp"

namespace ldapot {
namespace {

constexpr int kPollSliceMs = 100;

std::string to_hex(std::string_view bytes, std::size_t limit = 256) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    const std::size_t n = std::min(bytes.size(), limit);
    out.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = static_cast<unsigned char>(bytes[i]);
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    if (bytes.size() > limit) out += "...";
    return out;
}

// The natural response carrying `code` for a request identified by its
// application tag. Unknown or response-class tags fall back to an extendedResp
// so the client still sees a syntactically valid protocolError.
ProtocolOp synthesized_error_op(int request_app_tag, std::int32_t code) {
    const LdapResult result{code, "", "", std::nullopt};
    switch (request_app_tag) {
        case app_tag::bind_request: return BindResponse{result, std::nullopt};
        case app_tag::search_request: return SearchResultDone{result};
        case app_tag::modify_request: return ModifyResponse{result};
        case app_tag::add_request: return AddResponse{result};
        case app_tag::del_request: return DelResponse{result};
        case app_tag::mod_dn_request: return ModifyDnResponse{result};
        case app_tag::compare_request: return CompareResponse{result};
        case app_tag::extended_req:
        default: return ExtendedResponse{result, std::nullopt, std::nullopt};
    }
}

bool send_all(int fd, const std::uint8_t* data, std::size_t size) {
    std::size_t sent = 0;
    while (sent < size) {
        const ssize_t n = ::send(fd, data + sent, size - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

void ListenerConfig::validate() const {
    if (port < 0 || port > 65535)
        throw std::invalid_argument("port must be in 0..65535 (0 = pick a free port)");
    if (max_frame_bytes < 16) throw std::invalid_argument("max_frame_bytes must be >= 16");
    if (idle_timeout_seconds <= 0)
        throw std::invalid_argument("idle_timeout_seconds must be positive");
}

Listener::Listener(ListenerConfig config, std::shared_ptr<Responder> responder,
                   std::shared_ptr<InteractionLog> log)
    : config_(std::move(config)), responder_(std::move(responder)), log_(std::move(log)) {
    config_.validate();
    if (!responder_) throw std::invalid_argument("listener needs a responder");
}

Listener::~Listener() { stop(); }

void Listener::start() {
    if (running_.load()) return;

    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw BindFailure("socket(): " + std::string(std::strerror(errno)));

    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(config_.port));
    if (::inet_pton(AF_INET, config_.bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw BindFailure("invalid bind address: " + config_.bind_address);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 64) != 0) {
        const std::string reason = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw BindFailure("cannot listen on " + config_.bind_address + ":" +
                          std::to_string(config_.port) + ": " + reason);
    }

    sockaddr_in bound{};
    socklen_t bound_len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &bound_len);
    bound_port_ = ntohs(bound.sin_port);

    stopping_.store(false);
    running_.store(true);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void Listener::stop() {
    if (!running_.exchange(false)) return;
    stopping_.store(true);
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> sessions;
    {
        std::lock_guard lock(sessions_mutex_);
        sessions.swap(sessions_);
    }
    for (std::thread& session : sessions)
        if (session.joinable()) session.join();
}

void Listener::accept_loop() {
    while (!stopping_.load()) {
        sockaddr_in peer{};
        socklen_t peer_len = sizeof peer;
        const int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &peer_len);
        if (fd < 0) {
            if (stopping_.load()) break;
            if (errno == EINTR) continue;
            break;  // listen socket gone
        }
        char ip[INET_ADDRSTRLEN] = "?";
        ::inet_ntop(AF_INET, &peer.sin_addr, ip, sizeof ip);
        const int peer_port = ntohs(peer.sin_port);

        ++sessions_accepted_;
        std::lock_guard lock(sessions_mutex_);
        sessions_.emplace_back(
            [this, fd, peer_ip = std::string(ip), peer_port] {
                handle_session(fd, peer_ip, peer_port);
            });
    }
}

void Listener::handle_session(int fd, const std::string& peer_ip, int peer_port) {
    std::string buffer;
    int idle_ms = 0;
    bool closing = false;

    auto process_one_frame = [&]() -> bool {
        const auto bytes = std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(buffer.data()), buffer.size());
        const ber::PeekResult peek = ber::peek_frame_length(bytes);
        if (peek.status == ber::DecodeStatus::MalformedBer) {
            std::cerr << "session " << peer_ip << ":" << peer_port
                      << ": malformed frame header, closing. hex=" << to_hex(buffer) << "\n";
            closing = true;
            return false;
        }
        if (peek.status != ber::DecodeStatus::Ok) {
            // Header incomplete; an absurdly long prefix cannot become valid.
            if (buffer.size() > config_.max_frame_bytes) closing = true;
            return false;
        }
        if (peek.frame_length > config_.max_frame_bytes) {
            std::cerr << "session " << peer_ip << ":" << peer_port << ": frame of "
                      << peek.frame_length << " bytes exceeds limit " << config_.max_frame_bytes
                      << ", closing\n";
            closing = true;
            return false;
        }
        if (buffer.size() < peek.frame_length) return false;  // wait for the rest

        const auto frame = bytes.first(peek.frame_length);
        const ber::DecodeResult decoded = ber::decode_message(frame);
        const std::string frame_hex = to_hex(buffer.substr(0, peek.frame_length));
        buffer.erase(0, peek.frame_length);

        if (decoded.status == ber::DecodeStatus::MalformedBer) {
            std::cerr << "session " << peer_ip << ":" << peer_port
                      << ": malformed frame, closing. hex=" << frame_hex << "\n";
            closing = true;
            return false;
        }
        ++frames_received_;

        InteractionRecord record;
        record.timestamp = format_utc_timestamp_ms(std::chrono::system_clock::now());
        record.client_ip = peer_ip;
        record.client_port = peer_port;
        record.backend = responder_->label();

        RespondOutcome outcome;
        const auto started = std::chrono::steady_clock::now();
        if (decoded.status == ber::DecodeStatus::UnsupportedOp) {
            const int request_id = decoded.message_id.value_or(0);
            const int tag = decoded.app_tag.value_or(-1);
            Json placeholder = Json::object();
            placeholder["messageID"] = request_id;
            placeholder["protocolOp"]["unsupportedRequest"]["applicationTag"] = tag;
            record.request = std::move(placeholder);
            LdapMessage error;
            error.message_id = request_id;
            if (tag == app_tag::bind_request) {
                // A bind we cannot parse is a SASL attempt; only simple binds
                // are modeled.
                error.op = synthesized_error_op(tag, result_code::auth_method_not_supported);
                outcome.repair_actions.push_back(
                    "SASL bind answered with authMethodNotSupported");
            } else {
                error.op = synthesized_error_op(tag, result_code::protocol_error);
                outcome.repair_actions.push_back(
                    "unsupported operation answered with protocolError");
            }
            outcome.documents.push_back(jsonio::message_to_json(error));
        } else {
            record.request = jsonio::message_to_json(decoded.message);
            try {
                outcome = responder_->respond(record.request);
            } catch (const BackendUnavailable& e) {
                LdapMessage error;
                error.message_id = decoded.message.message_id;
                error.op =
                    synthesized_error_op(application_tag(decoded.message.op),
                                         result_code::unavailable);
                outcome.documents = {jsonio::message_to_json(error)};
                outcome.repair_actions = {std::string("backend unavailable: ") + e.what()};
            } catch (const std::invalid_argument&) {
                // A response-class operation sent by the client: unanswerable.
                LdapMessage error;
                error.message_id = decoded.message.message_id;
                error.op = synthesized_error_op(-1, result_code::protocol_error);
                outcome.documents = {jsonio::message_to_json(error)};
                outcome.repair_actions = {"response-class operation answered with protocolError"};
            }
        }
        record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        record.repair_actions = outcome.repair_actions;

        for (const Json& doc : outcome.documents) {
            try {
                const std::vector<std::uint8_t> encoded =
                    ber::encode_message(jsonio::json_to_message(doc));
                if (!send_all(fd, encoded.data(), encoded.size())) {
                    closing = true;
                    break;
                }
                ++frames_sent_;
                record.responses.push_back(doc);
            } catch (const std::exception& e) {
                record.repair_actions.push_back(
                    std::string("response document failed to encode and was dropped: ") +
                    e.what());
            }
        }
        if (log_) log_->append(record);
        return !closing;
    };

    while (!stopping_.load() && !closing) {
        if (buffer.size() >= 2 && process_one_frame()) continue;
        if (closing) break;

        pollfd waiter{fd, POLLIN, 0};
        const int ready = ::poll(&waiter, 1, kPollSliceMs);
        if (ready < 0) break;
        if (ready == 0) {
            idle_ms += kPollSliceMs;
            if (idle_ms >= config_.idle_timeout_seconds * 1000) break;
            continue;
        }
        char chunk[16384];
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) break;  // peer closed or error
        idle_ms = 0;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
    ::close(fd);
}

int block_shutdown_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return 0;
}

int wait_for_shutdown_signal() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    int signal_number = 0;
    sigwait(&set, &signal_number);
    return signal_number;
}

}  // namespace ldapot
