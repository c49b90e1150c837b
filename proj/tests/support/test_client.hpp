#pragma once

// Minimal blocking TCP client for exercising the listener from tests.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldapot/ber.hpp"

namespace testsupport {

class TestClient {
public:
    explicit TestClient(int port, const char* host = "127.0.0.1") {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw std::runtime_error("client socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        ::inet_pton(AF_INET, host, &addr.sin_addr);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw std::runtime_error("client connect() failed");
        }
    }

    ~TestClient() { close(); }
    TestClient(const TestClient&) = delete;
    TestClient& operator=(const TestClient&) = delete;

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    void send_bytes(std::string_view bytes) {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) throw std::runtime_error("client send() failed");
            sent += static_cast<std::size_t>(n);
        }
    }

    void send_frame(const std::vector<std::uint8_t>& frame) {
        send_bytes(std::string_view(reinterpret_cast<const char*>(frame.data()), frame.size()));
    }

    // Collect exactly `count` whole BER frames (using length arithmetic) or
    // throw on timeout/close.
    std::vector<std::vector<std::uint8_t>> read_frames(std::size_t count, int timeout_ms = 3000) {
        std::vector<std::vector<std::uint8_t>> frames;
        while (frames.size() < count) {
            const auto bytes = std::span<const std::uint8_t>(
                reinterpret_cast<const std::uint8_t*>(buffer_.data()), buffer_.size());
            const ldapot::ber::PeekResult peek = ldapot::ber::peek_frame_length(bytes);
            if (peek.status == ldapot::ber::DecodeStatus::Ok &&
                buffer_.size() >= peek.frame_length) {
                frames.emplace_back(buffer_.begin(), buffer_.begin() + peek.frame_length);
                buffer_.erase(0, peek.frame_length);
                continue;
            }
            if (peek.status == ldapot::ber::DecodeStatus::MalformedBer)
                throw std::runtime_error("received malformed response frame");
            if (!fill(timeout_ms)) throw std::runtime_error("timed out waiting for response frame");
        }
        return frames;
    }

    // True when the peer sent nothing for the whole window and the connection
    // is still open.
    bool silent_for(int window_ms) {
        pollfd waiter{fd_, POLLIN, 0};
        const int ready = ::poll(&waiter, 1, window_ms);
        if (ready == 0) return true;
        if (ready < 0) return false;
        char probe[256];
        const ssize_t n = ::recv(fd_, probe, sizeof probe, 0);
        if (n > 0) buffer_.append(probe, static_cast<std::size_t>(n));
        return false;  // data arrived or the peer closed
    }

    // True when the peer closed the connection within the window.
    bool closed_within(int window_ms) {
        const auto deadline_slices = window_ms / 50 + 1;
        for (int i = 0; i < deadline_slices; ++i) {
            pollfd waiter{fd_, POLLIN, 0};
            const int ready = ::poll(&waiter, 1, 50);
            if (ready <= 0) continue;
            char probe[256];
            const ssize_t n = ::recv(fd_, probe, sizeof probe, 0);
            if (n == 0) return true;
            if (n < 0) return true;
            buffer_.append(probe, static_cast<std::size_t>(n));
        }
        return false;
    }

private:
    bool fill(int timeout_ms) {
        pollfd waiter{fd_, POLLIN, 0};
        const int ready = ::poll(&waiter, 1, timeout_ms);
        if (ready <= 0) return false;
        char chunk[8192];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n <= 0) return false;
        buffer_.append(chunk, static_cast<std::size_t>(n));
        return true;
    }

    int fd_ = -1;
    std::string buffer_;
};

}  // namespace testsupport
