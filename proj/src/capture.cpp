#include "ldapot/capture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <sstream>

#include "ldapot/ber.hpp"
#include "ldapot/csv.hpp"
#include "ldapot/json_codec.hpp"
#include "ldapot/message.hpp"

namespace ldapot {
namespace {

// ---------------------------------------------------------------- pcap input

struct ByteReader {
    std::string_view data;
    std::size_t offset = 0;
    bool swapped = false;  // capture byte order differs from file-literal LE read

    bool has(std::size_t n) const { return offset + n <= data.size(); }

    std::uint32_t u32() {
        const auto b0 = static_cast<std::uint8_t>(data[offset]);
        const auto b1 = static_cast<std::uint8_t>(data[offset + 1]);
        const auto b2 = static_cast<std::uint8_t>(data[offset + 2]);
        const auto b3 = static_cast<std::uint8_t>(data[offset + 3]);
        offset += 4;
        return swapped ? (std::uint32_t(b0) << 24) | (std::uint32_t(b1) << 16) |
                             (std::uint32_t(b2) << 8) | b3
                       : (std::uint32_t(b3) << 24) | (std::uint32_t(b2) << 16) |
                             (std::uint32_t(b1) << 8) | b0;
    }

    std::uint16_t u16() {
        const auto b0 = static_cast<std::uint8_t>(data[offset]);
        const auto b1 = static_cast<std::uint8_t>(data[offset + 1]);
        offset += 2;
        return swapped ? static_cast<std::uint16_t>((b0 << 8) | b1)
                       : static_cast<std::uint16_t>((b1 << 8) | b0);
    }
};

std::uint16_t be16(std::string_view bytes, std::size_t at) {
    return static_cast<std::uint16_t>((static_cast<std::uint8_t>(bytes[at]) << 8) |
                                      static_cast<std::uint8_t>(bytes[at + 1]));
}

std::string dotted_quad(std::string_view bytes, std::size_t at) {
    std::string out;
    for (int i = 0; i < 4; ++i) {
        if (i) out.push_back('.');
        out += std::to_string(static_cast<std::uint8_t>(bytes[at + i]));
    }
    return out;
}

}  // namespace

std::string FlowStreams::id() const {
    return client_ip + ":" + std::to_string(client_port) + "->" + server_ip + ":" +
           std::to_string(server_port);
}

std::vector<FlowStreams> extract_ldap_streams(std::string_view capture, int server_port) {
    ByteReader reader{capture};
    if (!reader.has(24))
        throw UnsupportedCapture("capture shorter than a pcap global header (offset 0)");

    const std::uint32_t magic = reader.u32();
    double subsec_scale = 1e-6;
    switch (magic) {
        case 0xa1b2c3d4u: break;
        case 0xa1b23c4du: subsec_scale = 1e-9; break;
        case 0xd4c3b2a1u: reader.swapped = true; break;
        case 0x4d3cb2a1u:
            reader.swapped = true;
            subsec_scale = 1e-9;
            break;
        case 0x0a0d0d0au:
            throw UnsupportedCapture(
                "pcapng container (magic 0a0d0d0a at offset 0); convert to classic pcap");
        default:
            throw UnsupportedCapture("unrecognized capture magic at offset 0");
    }

    reader.offset = 20;  // skip version/thiszone/sigfigs/snaplen
    const std::uint32_t linktype = reader.u32();
    if (linktype != 1)
        throw UnsupportedCapture("link type " + std::to_string(linktype) +
                                 " at offset 20; only Ethernet (1) is supported");

    std::vector<FlowStreams> flows;
    auto flow_for = [&](const std::string& cip, int cport, const std::string& sip, int sport,
                        double when) -> FlowStreams& {
        for (FlowStreams& flow : flows)
            if (flow.client_ip == cip && flow.client_port == cport && flow.server_ip == sip &&
                flow.server_port == sport)
                return flow;
        FlowStreams flow;
        flow.client_ip = cip;
        flow.client_port = cport;
        flow.server_ip = sip;
        flow.server_port = sport;
        flow.first_seen = when;
        flows.push_back(std::move(flow));
        return flows.back();
    };

    while (reader.has(16)) {
        const double ts = static_cast<double>(reader.u32()) +
                          static_cast<double>(reader.u32()) * subsec_scale;
        const std::uint32_t incl_len = reader.u32();
        reader.u32();  // original length
        if (!reader.has(incl_len)) break;  // truncated tail record
        const std::string_view packet = capture.substr(reader.offset, incl_len);
        reader.offset += incl_len;

        // Ethernet
        if (packet.size() < 14) continue;
        if (be16(packet, 12) != 0x0800) continue;  // IPv4 only
        const std::string_view ip = packet.substr(14);

        if (ip.size() < 20) continue;
        const std::uint8_t version_ihl = static_cast<std::uint8_t>(ip[0]);
        if ((version_ihl >> 4) != 4) continue;
        const std::size_t ip_header = std::size_t(version_ihl & 0x0F) * 4;
        if (ip_header < 20 || ip.size() < ip_header) continue;
        const std::uint16_t total_length = be16(ip, 2);
        if (total_length < ip_header || total_length > ip.size()) continue;
        const std::uint16_t frag = be16(ip, 6);
        if ((frag & 0x1FFF) != 0 || (frag & 0x2000) != 0) continue;  // no fragments
        if (static_cast<std::uint8_t>(ip[9]) != 6) continue;         // TCP only

        const std::string src = dotted_quad(ip, 12);
        const std::string dst = dotted_quad(ip, 16);
        const std::string_view tcp = ip.substr(ip_header, total_length - ip_header);
        if (tcp.size() < 20) continue;
        const int src_port = be16(tcp, 0);
        const int dst_port = be16(tcp, 2);
        const std::size_t tcp_header = std::size_t(static_cast<std::uint8_t>(tcp[12]) >> 4) * 4;
        if (tcp_header < 20 || tcp.size() < tcp_header) continue;
        const std::string_view payload = tcp.substr(tcp_header);
        if (payload.empty()) continue;

        if (dst_port == server_port) {
            flow_for(src, src_port, dst, dst_port, ts).client_to_server.append(payload);
        } else if (src_port == server_port) {
            flow_for(dst, dst_port, src, src_port, ts).server_to_client.append(payload);
        }
    }
    return flows;
}

std::vector<FlowStreams> extract_ldap_streams_file(const std::filesystem::path& path,
                                                   int server_port) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnsupportedCapture("cannot open capture file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string bytes = buffer.str();
    return extract_ldap_streams(bytes, server_port);
}

// ------------------------------------------------------------------ pairing

namespace {

struct DecodedStream {
    std::vector<ber::DecodeResult> messages;
    std::vector<std::string> notes;
};

DecodedStream decode_stream(std::string_view stream, const char* label) {
    DecodedStream out;
    std::size_t pos = 0;
    while (pos < stream.size()) {
        const auto bytes = std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(stream.data()) + pos, stream.size() - pos);
        const ber::PeekResult peek = ber::peek_frame_length(bytes);
        if (peek.status != ber::DecodeStatus::Ok || bytes.size() < peek.frame_length) {
            out.notes.push_back(std::string(label) + " stream ends with " +
                                std::to_string(stream.size() - pos) +
                                " undecodable byte(s)");
            break;
        }
        ber::DecodeResult decoded = ber::decode_message(bytes.first(peek.frame_length));
        if (decoded.status == ber::DecodeStatus::MalformedBer) {
            out.notes.push_back(std::string(label) + " stream has a malformed frame at offset " +
                                std::to_string(pos) + "; stopping");
            break;
        }
        pos += peek.frame_length;
        out.messages.push_back(std::move(decoded));
    }
    return out;
}

}  // namespace

PairingResult pair_messages(std::string_view client_stream, std::string_view server_stream) {
    PairingResult result;

    DecodedStream requests = decode_stream(client_stream, "client");
    DecodedStream responses = decode_stream(server_stream, "server");
    result.diagnostics.insert(result.diagnostics.end(), requests.notes.begin(),
                              requests.notes.end());
    result.diagnostics.insert(result.diagnostics.end(), responses.notes.begin(),
                              responses.notes.end());

    struct Slot {
        std::size_t pair_index;
        std::string terminal_op;  // response op that completes this request
        bool completed = false;
        std::vector<std::string> outputs;
    };
    std::vector<Slot> slots;
    // per messageID: indices into slots, plus a cursor to the first open one
    std::map<std::int32_t, std::vector<std::size_t>> slots_by_id;
    std::map<std::int32_t, std::size_t> cursor_by_id;

    for (const ber::DecodeResult& decoded : requests.messages) {
        if (decoded.status == ber::DecodeStatus::UnsupportedOp) {
            result.diagnostics.push_back(
                "skipped unsupported request (application tag " +
                std::to_string(decoded.app_tag.value_or(-1)) + ", messageID " +
                std::to_string(decoded.message_id.value_or(0)) + ")");
            continue;
        }
        const std::string op(op_name(decoded.message.op));
        if (!is_request_op(op)) {
            result.diagnostics.push_back("skipped response-class message " + op +
                                         " in the client stream");
            continue;
        }
        CapturedPair pair;
        pair.input = jsonio::dump_document(jsonio::message_to_json(decoded.message));
        result.pairs.push_back(std::move(pair));

        const std::optional<std::string_view> terminal = response_op_for(op);
        if (!terminal) continue;  // unbind/abandon: empty output, nothing attaches
        Slot slot;
        slot.pair_index = result.pairs.size() - 1;
        slot.terminal_op = std::string(*terminal);
        slots.push_back(std::move(slot));
        slots_by_id[decoded.message.message_id].push_back(slots.size() - 1);
    }

    for (const ber::DecodeResult& decoded : responses.messages) {
        if (decoded.status == ber::DecodeStatus::UnsupportedOp) {
            result.diagnostics.push_back("skipped unsupported message in the server stream");
            continue;
        }
        const std::int32_t id = decoded.message.message_id;
        const std::string op(op_name(decoded.message.op));

        const auto ids = slots_by_id.find(id);
        std::size_t& cursor = cursor_by_id[id];
        while (ids != slots_by_id.end() && cursor < ids->second.size() &&
               slots[ids->second[cursor]].completed)
            ++cursor;
        if (ids == slots_by_id.end() || cursor >= ids->second.size()) {
            result.diagnostics.push_back("orphan response " + op + " with messageID " +
                                         std::to_string(id));
            continue;
        }
        Slot& slot = slots[ids->second[cursor]];
        slot.outputs.push_back(jsonio::dump_document(jsonio::message_to_json(decoded.message)));
        if (op == slot.terminal_op) slot.completed = true;
    }

    for (const Slot& slot : slots) {
        std::string joined;
        for (std::size_t i = 0; i < slot.outputs.size(); ++i) {
            if (i) joined.push_back('\n');
            joined += slot.outputs[i];
        }
        result.pairs[slot.pair_index].output = std::move(joined);
    }
    return result;
}

PairingResult pair_messages(const FlowStreams& flow) {
    PairingResult result = pair_messages(flow.client_to_server, flow.server_to_client);
    for (CapturedPair& pair : result.pairs) {
        pair.flow_id = flow.id();
        pair.timestamp = flow.first_seen;
    }
    return result;
}

// ---------------------------------------------------------------- CSV output

int write_dataset_csv(const std::vector<CapturedPair>& pairs, std::ostream& out) {
    csv::write_row(out, {"input", "output"});
    for (const CapturedPair& pair : pairs) csv::write_row(out, {pair.input, pair.output});
    return static_cast<int>(pairs.size());
}

int write_dataset_csv_file(const std::vector<CapturedPair>& pairs,
                           const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset CSV: " + path.string());
    const int rows = write_dataset_csv(pairs, out);
    out.flush();
    if (!out) throw std::runtime_error("short write to dataset CSV: " + path.string());
    return rows;
}

std::vector<CapturedPair> read_dataset_csv_file(const std::filesystem::path& path) {
    const auto records = csv::read_file(path);
    if (records.empty() || records[0] != std::vector<std::string>{"input", "output"})
        throw std::runtime_error("dataset CSV " + path.string() +
                                 " is missing the input,output header");
    std::vector<CapturedPair> pairs;
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() == 1 && records[i][0].empty()) continue;  // blank line
        if (records[i].size() != 2)
            throw std::runtime_error("dataset CSV " + path.string() + " row " +
                                     std::to_string(i + 1) + " does not have 2 columns");
        CapturedPair pair;
        pair.input = records[i][0];
        pair.output = records[i][1];
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

// ------------------------------------------------- distribution + generation

OperationDistribution OperationDistribution::evaluation() {
    OperationDistribution d;
    d.queries = 35.38;
    d.authentications = 44.62;
    d.modifications = 6.15;
    d.comparisons = 4.62;
    d.creations = 3.08;
    d.deletions = 3.08;
    d.extended = 3.08;
    d.moves = 0.0;
    return d;
}

std::vector<double> OperationDistribution::as_weights() const {
    return {queries,   authentications, modifications, comparisons,
            creations, deletions,       extended,      moves};
}

void OperationDistribution::validate() const {
    const std::vector<double> weights = as_weights();
    double sum = 0;
    for (double w : weights) {
        if (w < 0) throw std::invalid_argument("operation weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 100.0) > 0.011)
        throw std::invalid_argument("operation weights must sum to 100%, got " +
                                    std::to_string(sum));
}

std::vector<int> largest_remainder_counts(const std::vector<double>& weights_percent, int n) {
    const std::size_t k = weights_percent.size();
    std::vector<int> counts(k, 0);
    std::vector<double> fractions(k, 0.0);
    int assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double exact = static_cast<double>(n) * weights_percent[i] / 100.0;
        counts[i] = static_cast<int>(std::floor(exact));
        fractions[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    int leftover = n - assigned;
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fractions[a] > fractions[b];
    });
    for (std::size_t i = 0; leftover > 0 && i < k; ++i, --leftover) ++counts[order[i]];
    // A weight sum slightly above 100% can over-assign floors; trim from the
    // smallest fractions.
    for (std::size_t i = k; leftover < 0 && i > 0; --i) {
        if (counts[order[i - 1]] > 0) {
            --counts[order[i - 1]];
            ++leftover;
        }
    }
    return counts;
}

namespace {

using Rng = std::mt19937;

std::uint32_t pick(Rng& rng, std::size_t n) { return rng() % static_cast<std::uint32_t>(n); }

bool roll_failure(Rng& rng, double ratio) {
    return pick(rng, 1000) < static_cast<std::uint32_t>(ratio * 1000.0 + 0.5);
}

std::string first_value(const DirectoryEntry& entry, std::string_view attr,
                        const std::string& fallback) {
    const DirectoryAttribute* found = entry.find_attribute(attr);
    if (!found || found->values.empty()) return fallback;
    return found->values[0];
}

std::vector<const DirectoryEntry*> entries_where(const Directory& dir, auto&& predicate) {
    std::vector<const DirectoryEntry*> out;
    for (const DirectoryEntry& entry : dir.entries())
        if (predicate(entry)) out.push_back(&entry);
    return out;
}

std::string ghost_dn(const Directory& dir) {
    const std::string suffix = dir.suffix().empty() ? "dc=gone" : dir.suffix();
    return "cn=ghost-account," + suffix;
}

ProtocolOp make_query(Rng& rng, const Directory& dir, bool fail) {
    if (fail)
        return SearchRequest{"ou=nowhere,dc=invalid",      search_scope::whole_subtree, 0, 0, 0,
                             false, Filter::present("objectClass"), {}};

    const auto all = entries_where(dir, [](const DirectoryEntry&) { return true; });
    std::string base = dir.suffix();
    std::int32_t scope = search_scope::whole_subtree;
    switch (all.empty() ? 0 : pick(rng, 3)) {
        case 0: break;
        case 1: {
            base = all[pick(rng, all.size())]->dn;
            scope = search_scope::base_object;
            break;
        }
        case 2: {
            const auto containers = entries_where(
                dir, [&dir](const DirectoryEntry& e) { return dir.has_children(e.dn); });
            if (!containers.empty()) base = containers[pick(rng, containers.size())]->dn;
            scope = search_scope::single_level;
            break;
        }
    }
    Filter filter = Filter::present("objectClass");
    switch (pick(rng, 3)) {
        case 0: break;
        case 1: filter = Filter::equality("objectClass", "inetOrgPerson"); break;
        case 2: filter = Filter::substrings("cn", std::nullopt, {"a"}, std::nullopt); break;
    }
    const std::int32_t size_limit = static_cast<std::int32_t>(pick(rng, 6));
    std::vector<std::string> attributes;
    if (pick(rng, 2) == 1) attributes = {"cn", "mail"};
    return SearchRequest{base, scope, 0, size_limit, 0, false, std::move(filter),
                         std::move(attributes)};
}

ProtocolOp make_authentication(Rng& rng, const Directory& dir, bool fail) {
    const auto accounts = entries_where(dir, [](const DirectoryEntry& e) {
        return e.find_attribute("userPassword") != nullptr;
    });
    if (accounts.empty()) return BindRequest{3, ghost_dn(dir), "whatever"};
    const DirectoryEntry& account = *accounts[pick(rng, accounts.size())];
    const std::string password = first_value(account, "userPassword", "");
    if (!fail) return BindRequest{3, account.dn, password};
    if (pick(rng, 2) == 0) return BindRequest{3, account.dn, password + "!"};
    return BindRequest{3, ghost_dn(dir), password};
}

ProtocolOp make_modification(Rng& rng, const Directory& dir, bool fail, int serial) {
    const auto leaves = entries_where(
        dir, [&dir](const DirectoryEntry& e) { return !dir.has_children(e.dn); });
    if (fail || leaves.empty()) {
        if (!leaves.empty() && pick(rng, 2) == 0) {
            // deleting an attribute nobody has fails with noSuchAttribute
            const DirectoryEntry& target = *leaves[pick(rng, leaves.size())];
            return ModifyRequest{target.dn,
                                 {ModifyChange{modify_op::remove, PartialAttribute{"pager", {}}}}};
        }
        return ModifyRequest{ghost_dn(dir),
                             {ModifyChange{modify_op::replace,
                                           PartialAttribute{"title", {"never applied"}}}}};
    }
    const DirectoryEntry& target = *leaves[pick(rng, leaves.size())];
    if (pick(rng, 2) == 0)
        return ModifyRequest{
            target.dn,
            {ModifyChange{modify_op::replace,
                          PartialAttribute{"title", {"synthetic role " + std::to_string(serial)}}}}};
    return ModifyRequest{
        target.dn,
        {ModifyChange{modify_op::add,
                      PartialAttribute{"description", {"generated note " + std::to_string(serial)}}}}};
}

ProtocolOp make_comparison(Rng& rng, const Directory& dir, bool fail) {
    if (fail) return CompareRequest{ghost_dn(dir), "cn", "anything"};
    const auto leaves = entries_where(
        dir, [&dir](const DirectoryEntry& e) { return !dir.has_children(e.dn); });
    if (leaves.empty()) return CompareRequest{ghost_dn(dir), "cn", "anything"};
    const DirectoryEntry& target = *leaves[pick(rng, leaves.size())];
    const std::string value = first_value(target, "cn", "missing");
    if (pick(rng, 2) == 0) return CompareRequest{target.dn, "cn", value};
    return CompareRequest{target.dn, "cn", value + "-not"};
}

ProtocolOp make_creation(Rng& rng, const Directory& dir, bool fail, int serial) {
    if (fail) {
        const auto& entries = dir.entries();
        if (!entries.empty()) {
            const DirectoryEntry& existing = entries[pick(rng, entries.size())];
            return AddRequest{existing.dn,
                              {PartialAttribute{"objectClass", {"inetOrgPerson"}},
                               PartialAttribute{"cn", {"duplicate"}}}};
        }
    }
    const auto containers = entries_where(
        dir, [&dir](const DirectoryEntry& e) { return dir.has_children(e.dn); });
    const std::string parent =
        containers.empty() ? dir.suffix() : containers[pick(rng, containers.size())]->dn;
    const std::string name = "generated-" + std::to_string(serial);
    return AddRequest{"cn=" + name + "," + parent,
                      {PartialAttribute{"objectClass", {"inetOrgPerson"}},
                       PartialAttribute{"cn", {name}},
                       PartialAttribute{"sn", {"synthetic"}}}};
}

ProtocolOp make_deletion(Rng& rng, const Directory& dir, bool fail) {
    if (fail) {
        const auto containers = entries_where(
            dir, [&dir](const DirectoryEntry& e) { return dir.has_children(e.dn); });
        if (!containers.empty() && pick(rng, 2) == 0)
            return DelRequest{containers[pick(rng, containers.size())]->dn};
        return DelRequest{ghost_dn(dir)};
    }
    const auto leaves = entries_where(
        dir, [&dir](const DirectoryEntry& e) { return !dir.has_children(e.dn); });
    if (leaves.empty()) return DelRequest{ghost_dn(dir)};
    return DelRequest{leaves[pick(rng, leaves.size())]->dn};
}

ProtocolOp make_extended(Rng& rng) {
    if (pick(rng, 2) == 0) return ExtendedRequest{"1.3.6.1.4.1.4203.1.11.3", std::nullopt};
    return ExtendedRequest{"1.3.6.1.4.1.1466.20037", std::nullopt};
}

ProtocolOp make_move(Rng& rng, const Directory& dir, bool fail, int serial) {
    if (fail) return ModifyDnRequest{ghost_dn(dir), "cn=nowhere", true, std::nullopt};
    const auto leaves = entries_where(
        dir, [&dir](const DirectoryEntry& e) { return !dir.has_children(e.dn); });
    if (leaves.empty()) return ModifyDnRequest{ghost_dn(dir), "cn=nowhere", true, std::nullopt};
    const DirectoryEntry& target = *leaves[pick(rng, leaves.size())];
    return ModifyDnRequest{target.dn, "cn=relocated-" + std::to_string(serial), true,
                           std::nullopt};
}

}  // namespace

std::vector<CapturedPair> generate_synthetic_dataset(Directory& directory,
                                                     const OperationDistribution& distribution,
                                                     std::uint32_t seed, int n,
                                                     const GenerateOptions& options) {
    if (n < 1) throw std::invalid_argument("dataset size must be at least 1");
    if (options.failure_ratio < 0 || options.failure_ratio > 1)
        throw std::invalid_argument("failure_ratio must be in [0, 1]");
    distribution.validate();

    const std::vector<int> counts = largest_remainder_counts(distribution.as_weights(), n);
    std::vector<int> classes;
    classes.reserve(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < counts.size(); ++c)
        classes.insert(classes.end(), static_cast<std::size_t>(counts[c]), static_cast<int>(c));

    Rng rng(seed);
    for (std::size_t i = classes.size(); i > 1; --i)
        std::swap(classes[i - 1], classes[pick(rng, i)]);

    std::vector<CapturedPair> pairs;
    pairs.reserve(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const bool fail = roll_failure(rng, options.failure_ratio);
        const int serial = static_cast<int>(k);
        ProtocolOp op;
        switch (classes[k]) {
            case 0: op = make_query(rng, directory, fail); break;
            case 1: op = make_authentication(rng, directory, fail); break;
            case 2: op = make_modification(rng, directory, fail, serial); break;
            case 3: op = make_comparison(rng, directory, fail); break;
            case 4: op = make_creation(rng, directory, fail, serial); break;
            case 5: op = make_deletion(rng, directory, fail); break;
            case 6: op = make_extended(rng); break;
            default: op = make_move(rng, directory, fail, serial); break;
        }

        LdapMessage message;
        message.message_id = static_cast<std::int32_t>(k % 2147483647) + 1;
        message.op = std::move(op);
        const Json request = jsonio::message_to_json(message);
        const std::vector<Json> responses = respond_sim(request, directory);

        CapturedPair pair;
        pair.input = jsonio::dump_document(request);
        std::string joined;
        for (std::size_t i = 0; i < responses.size(); ++i) {
            if (i) joined.push_back('\n');
            joined += jsonio::dump_document(responses[i]);
        }
        pair.output = std::move(joined);
        pair.flow_id = "synthetic";
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

}  // namespace ldapot
