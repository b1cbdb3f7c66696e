#include "qkdsim/wire.hpp"

#include <algorithm>

namespace qkdsim::auth {
namespace {

constexpr std::size_t kMaxField = 0xFFFF;

void put_be64(Bytes& out, std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint64_t get_be64(std::span<const std::uint8_t> p) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

PartyId::PartyId(std::string id) : id_(std::move(id)) {
    if (id_.empty() || id_.size() > 32) throw std::invalid_argument("PartyId: length must be 1..32 bytes");
}

// ---- FieldWriter ----

FieldWriter& FieldWriter::raw(std::span<const std::uint8_t> content) {
    if (content.size() > kMaxField) throw WireError("field longer than 65535 bytes");
    out_.push_back(static_cast<std::uint8_t>(content.size() >> 8));
    out_.push_back(static_cast<std::uint8_t>(content.size() & 0xFF));
    out_.insert(out_.end(), content.begin(), content.end());
    return *this;
}

FieldWriter& FieldWriter::id(const PartyId& id) {
    const auto& s = id.str();
    return raw(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

FieldWriter& FieldWriter::u64(std::uint64_t v) {
    Bytes b;
    put_be64(b, v);
    return raw(b);
}

FieldWriter& FieldWriter::key(const SymmetricKey& k) { return raw(k.bytes); }

FieldWriter& FieldWriter::block(const EncryptedBlock& b) {
    Bytes content = b.ciphertext;
    put_be64(content, b.tag);
    return raw(content);
}

// ---- FieldReader ----

std::span<const std::uint8_t> FieldReader::raw() {
    if (in_.size() - pos_ < 2) throw WireError("truncated field length");
    const std::size_t len = (std::size_t{in_[pos_]} << 8) | in_[pos_ + 1];
    pos_ += 2;
    if (in_.size() - pos_ < len) throw WireError("truncated field content");
    auto field = in_.subspan(pos_, len);
    pos_ += len;
    return field;
}

PartyId FieldReader::id() {
    const auto f = raw();
    if (f.empty() || f.size() > 32) throw WireError("party id must be 1..32 bytes");
    return PartyId(std::string(f.begin(), f.end()));
}

std::uint64_t FieldReader::u64() {
    const auto f = raw();
    if (f.size() != 8) throw WireError("integer field must be 8 bytes");
    return get_be64(f);
}

SymmetricKey FieldReader::key() {
    const auto f = raw();
    SymmetricKey k;
    if (f.size() != k.bytes.size()) throw WireError("key field must be 16 bytes");
    std::copy(f.begin(), f.end(), k.bytes.begin());
    return k;
}

EncryptedBlock FieldReader::block() {
    const auto f = raw();
    if (f.size() < 8) throw WireError("encrypted block shorter than its tag");
    EncryptedBlock b;
    b.ciphertext.assign(f.begin(), f.end() - 8);
    b.tag = get_be64(f.subspan(f.size() - 8));
    return b;
}

void FieldReader::expect_end() const {
    if (!at_end()) throw WireError("trailing bytes after last field");
}

// ---- sealed payloads ----

Bytes serialize(const KdcRequest& r) { return FieldWriter().id(r.id_a).nonce(r.n_a).timestamp(r.t_b).take(); }

Bytes serialize(const AlicePackage& p) {
    return FieldWriter().id(p.id_b).nonce(p.n_a).key(p.k_s).timestamp(p.t_b).take();
}

Bytes serialize(const Ticket& t) { return FieldWriter().id(t.id_a).key(t.k_s).timestamp(t.t_b).take(); }

Bytes serialize_nonce(Nonce n) { return FieldWriter().nonce(n).take(); }

KdcRequest parse_kdc_request(std::span<const std::uint8_t> bytes) {
    FieldReader r(bytes);
    KdcRequest out{r.id(), r.nonce(), r.timestamp()};
    r.expect_end();
    return out;
}

AlicePackage parse_alice_package(std::span<const std::uint8_t> bytes) {
    FieldReader r(bytes);
    auto id = r.id();
    auto n = r.nonce();
    auto k = r.key();
    auto t = r.timestamp();
    r.expect_end();
    return AlicePackage{std::move(id), n, k, t};
}

Ticket parse_ticket(std::span<const std::uint8_t> bytes) {
    FieldReader r(bytes);
    auto id = r.id();
    auto k = r.key();
    auto t = r.timestamp();
    r.expect_end();
    return Ticket{std::move(id), k, t};
}

Nonce parse_nonce(std::span<const std::uint8_t> bytes) {
    FieldReader r(bytes);
    const Nonce n = r.nonce();
    r.expect_end();
    return n;
}

// ---- message fields ----

int step_of(const ClassicalFields& f) { return static_cast<int>(f.index()) + 1; }

Bytes serialize(const ClassicalFields& f) {
    FieldWriter w;
    std::visit(
        [&w](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Step1Fields>) {
                w.id(m.id_a).nonce(m.n_a);
            } else if constexpr (std::is_same_v<T, Step2Fields>) {
                w.id(m.id_b).nonce(m.n_b).block(m.kdc_request);
            } else if constexpr (std::is_same_v<T, Step3Fields>) {
                w.block(m.alice_package).block(m.ticket).nonce(m.n_b);
            } else {
                w.block(m.ticket).block(m.nonce_proof);
            }
        },
        f);
    return w.take();
}

ClassicalFields parse_fields(int step, std::span<const std::uint8_t> bytes) {
    FieldReader r(bytes);
    ClassicalFields out = [&]() -> ClassicalFields {
        switch (step) {
            case 1: {
                auto id = r.id();
                return Step1Fields{std::move(id), r.nonce()};
            }
            case 2: {
                auto id = r.id();
                auto n = r.nonce();
                return Step2Fields{std::move(id), n, r.block()};
            }
            case 3: {
                auto pkg = r.block();
                auto ticket = r.block();
                return Step3Fields{std::move(pkg), std::move(ticket), r.nonce()};
            }
            case 4: {
                auto ticket = r.block();
                return Step4Fields{std::move(ticket), r.block()};
            }
            default: throw WireError("unknown protocol step");
        }
    }();
    r.expect_end();
    return out;
}

}  // namespace qkdsim::auth
