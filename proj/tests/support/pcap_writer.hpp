// Test-only builder for classic pcap files: Ethernet + IPv4 + TCP frames
// with enough header realism for the capture reader (ethertype, IHL,
// total length, fragment flags, data offset).

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace testsupport {

struct PcapOptions {
    bool big_endian = false;       // file-level byte order
    bool nanosecond = false;       // subsecond unit magic
    std::uint32_t linktype = 1;    // Ethernet
};

class PcapWriter {
  public:
    using Options = PcapOptions;

    explicit PcapWriter(Options options = {}) : options_(options) {
        const std::uint32_t magic = options_.nanosecond ? 0xa1b23c4du : 0xa1b2c3d4u;
        put32(magic);
        put16(2);   // version major
        put16(4);   // version minor
        put32(0);   // thiszone
        put32(0);   // sigfigs
        put32(65535);
        put32(options_.linktype);
    }

    // Append one TCP segment as a full record. `src`/`dst` are dotted quads.
    void add_tcp(const std::string& src, std::uint16_t src_port, const std::string& dst,
                 std::uint16_t dst_port, std::string_view payload, std::uint32_t ts_sec = 0,
                 std::uint32_t ts_subsec = 0, std::size_t trailing_padding = 0) {
        std::string packet = ethernet_header(0x0800) + ipv4_tcp(src, dst, payload.size()) +
                             tcp_header(src_port, dst_port) + std::string(payload);
        packet.append(trailing_padding, '\0');  // Ethernet pad beyond IP total length
        add_record(ts_sec, ts_subsec, packet);
    }

    // A UDP datagram (protocol 17) — the extractor must skip it.
    void add_udp(const std::string& src, const std::string& dst, std::string_view payload) {
        const std::string udp = std::string("\x00\x35\x00\x35", 4) +
                                be16_str(static_cast<std::uint16_t>(8 + payload.size())) +
                                std::string("\x00\x00", 2) + std::string(payload);
        std::string packet = ethernet_header(0x0800) + ipv4_raw(src, dst, 17, udp.size()) + udp;
        add_record(0, 0, packet);
    }

    // A TCP segment marked as an IP fragment — must be skipped.
    void add_fragmented_tcp(const std::string& src, std::uint16_t src_port,
                            const std::string& dst, std::uint16_t dst_port,
                            std::string_view payload) {
        const std::string tcp = tcp_header(src_port, dst_port) + std::string(payload);
        std::string ip = ipv4_raw(src, dst, 6, tcp.size());
        ip[6] = 0x20;  // more-fragments flag
        add_record(0, 0, ethernet_header(0x0800) + ip + tcp);
    }

    // An ARP frame (non-IPv4 ethertype) — must be skipped.
    void add_arp() { add_record(0, 0, ethernet_header(0x0806) + std::string(28, '\0')); }

    // Record with a truncated body (incl_len larger than remaining bytes).
    void add_truncated_record() {
        put32(0);
        put32(0);
        put32(500);  // claims 500 bytes follow
        put32(500);
        bytes_ += "short";
    }

    const std::string& bytes() const { return bytes_; }

  private:
    Options options_;
    std::string bytes_;

    void put16(std::uint16_t v) {
        if (options_.big_endian) {
            bytes_.push_back(static_cast<char>(v >> 8));
            bytes_.push_back(static_cast<char>(v & 0xFF));
        } else {
            bytes_.push_back(static_cast<char>(v & 0xFF));
            bytes_.push_back(static_cast<char>(v >> 8));
        }
    }

    void put32(std::uint32_t v) {
        if (options_.big_endian) {
            for (int shift = 24; shift >= 0; shift -= 8)
                bytes_.push_back(static_cast<char>((v >> shift) & 0xFF));
        } else {
            for (int shift = 0; shift <= 24; shift += 8)
                bytes_.push_back(static_cast<char>((v >> shift) & 0xFF));
        }
    }

    static std::string be16_str(std::uint16_t v) {
        std::string out;
        out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xFF));
        return out;
    }

    static std::string ethernet_header(std::uint16_t ethertype) {
        std::string h(12, '\x02');  // dst + src MAC, content irrelevant
        h += be16_str(ethertype);
        return h;
    }

    static std::string ip_bytes(const std::string& dotted) {
        std::string out;
        std::size_t start = 0;
        for (int i = 0; i < 4; ++i) {
            const std::size_t dot = dotted.find('.', start);
            out.push_back(static_cast<char>(std::stoi(dotted.substr(start, dot - start))));
            start = dot + 1;
        }
        return out;
    }

    static std::string ipv4_raw(const std::string& src, const std::string& dst,
                                std::uint8_t protocol, std::size_t body_len) {
        std::string h;
        h.push_back('\x45');  // version 4, IHL 5
        h.push_back('\0');
        h += be16_str(static_cast<std::uint16_t>(20 + body_len));
        h += std::string("\x00\x00\x00\x00", 4);  // id, flags/fragment
        h.push_back('\x40');                      // TTL
        h.push_back(static_cast<char>(protocol));
        h += std::string("\x00\x00", 2);          // checksum (unchecked)
        h += ip_bytes(src);
        h += ip_bytes(dst);
        return h;
    }

    static std::string ipv4_tcp(const std::string& src, const std::string& dst,
                                std::size_t payload_len) {
        return ipv4_raw(src, dst, 6, 20 + payload_len);
    }

    static std::string tcp_header(std::uint16_t src_port, std::uint16_t dst_port) {
        std::string h;
        h += be16_str(src_port);
        h += be16_str(dst_port);
        h += std::string(8, '\0');  // seq + ack
        h.push_back('\x50');        // data offset 5 words
        h.push_back('\x18');        // PSH|ACK
        h += std::string("\x01\x00\x00\x00\x00\x00", 6);  // window, checksum, urgent
        return h;
    }

    void add_record(std::uint32_t ts_sec, std::uint32_t ts_subsec, const std::string& packet) {
        put32(ts_sec);
        put32(ts_subsec);
        put32(static_cast<std::uint32_t>(packet.size()));
        put32(static_cast<std::uint32_t>(packet.size()));
        bytes_ += packet;
    }
};

}  // namespace testsupport
