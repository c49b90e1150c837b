#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ldapot/interaction_log.hpp"
#include "ldapot/responder.hpp"

namespace ldapot {

struct BindFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ListenerConfig {
    std::string bind_address = "0.0.0.0";
    int port = 389;                        // 0 picks a free port (useful for tests)
    int idle_timeout_seconds = 300;
    std::size_t max_frame_bytes = 1 << 20;

    void validate() const;                 // throws std::invalid_argument
};

// TCP front end: accepts connections, assembles BER frames, hands each decoded
// request to the responder, and writes the encoded answers back in order.
//
// Session policies:
//   - unbindRequest and abandonRequest produce zero response bytes; the
//     connection stays open until the peer closes or the idle timeout fires.
//   - a malformed frame is logged (hex to stderr) and the connection closes;
//     the listener itself keeps accepting.
//   - frames longer than max_frame_bytes close the connection.
//   - decodable-but-unanswerable requests get their operation's natural
//     response with protocolError(2); unknown operations get an extendedResp.
//   - a failing backend yields the operation's response with unavailable(52).
class Listener {
public:
    Listener(ListenerConfig config, std::shared_ptr<Responder> responder,
             std::shared_ptr<InteractionLog> log = nullptr);
    ~Listener();

    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    void start();                          // binds and begins accepting; throws BindFailure
    void stop();                           // stops accepting and drains in-flight sessions
    bool running() const { return running_.load(); }

    int port() const { return bound_port_; }

    std::uint64_t sessions_accepted() const { return sessions_accepted_.load(); }
    std::uint64_t frames_received() const { return frames_received_.load(); }
    std::uint64_t frames_sent() const { return frames_sent_.load(); }

private:
    void accept_loop();
    void handle_session(int fd, const std::string& peer_ip, int peer_port);

    ListenerConfig config_;
    std::shared_ptr<Responder> responder_;
    std::shared_ptr<InteractionLog> log_;

    int listen_fd_ = -1;
    int bound_port_ = 0;
    std::atomic<bool> running_{false};
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex sessions_mutex_;
    std::vector<std::thread> sessions_;

    std::atomic<std::uint64_t> sessions_accepted_{0};
    std::atomic<std::uint64_t> frames_received_{0};
    std::atomic<std::uint64_t> frames_sent_{0};
};

// Blocks until SIGINT or SIGTERM, then stops the listener. Call before
// starting the listener so every worker thread inherits the signal mask.
// Returns the signal number that ended the wait.
int block_shutdown_signals();              // returns 0; call from the main thread first
int wait_for_shutdown_signal();            // blocks; returns the delivered signal

}  // namespace ldapot
