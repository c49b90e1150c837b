// ber.hpp
//
// BER encode/decode of LDAPMessage frames (RFC 4511 section 5.1: definite
// lengths only, no extensibility markers interpreted).  The decoder is total:
// any input yields a status, never a crash.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldapot/message.hpp"

namespace ldapot::ber {

class EncodeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class DecodeStatus {
    Ok,
    IncompleteFrame,  // need more bytes to finish the outer SEQUENCE
    MalformedBer,     // violates BER or the message grammar; drop connection
    UnsupportedOp,    // well-formed frame, operation we do not model
};

std::string_view to_string(DecodeStatus s);

struct DecodeResult {
    DecodeStatus status = DecodeStatus::MalformedBer;
    LdapMessage message;                       // valid when status == Ok
    std::size_t consumed = 0;                  // bytes of the frame; valid for Ok/UnsupportedOp
    std::optional<std::int32_t> message_id;    // set whenever the envelope id was readable
    std::optional<int> app_tag;                // protocol-op application tag when readable
    std::string error;                         // diagnostic for MalformedBer/UnsupportedOp
};

// Decode one message from the front of the buffer.
DecodeResult decode_message(std::span<const std::uint8_t> buffer);

// Encode a message to a self-contained frame.  Throws EncodeError for values
// the wire format cannot carry (negative/oversized messageID, scope or
// derefAliases out of range, negative limits).
std::vector<std::uint8_t> encode_message(const LdapMessage& m);

struct PeekResult {
    DecodeStatus status = DecodeStatus::IncompleteFrame;  // Ok / IncompleteFrame / MalformedBer
    std::size_t frame_length = 0;                         // total bytes incl. tag+length, when Ok
};

// Inspect the outer tag+length without decoding the body.  Used by the
// listener to slice frames out of a TCP stream.
PeekResult peek_frame_length(std::span<const std::uint8_t> buffer);

}  // namespace ldapot::ber
