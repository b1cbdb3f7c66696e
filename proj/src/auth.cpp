#include "qkdsim/auth.hpp"

#include <sstream>

namespace qkdsim::auth {
namespace {

std::string join(const std::vector<std::string>& parts) {
    std::ostringstream os;
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? ", " : "") << parts[i];
    return os.str();
}

// Reads the classical fields back out of the qubit header.
std::optional<ClassicalFields> read_header(int step, const AuthMessage& msg, const VerifyContext& ctx,
                                           VerificationOutcome& outcome) {
    if (msg.step != step) {
        outcome = VerificationOutcome::reject(Rejection::malformed, "message is not a step " + std::to_string(step) + " message");
        return std::nullopt;
    }
    if (ctx.rng == nullptr) throw std::invalid_argument("verify_message: context has no RandomStream");
    try {
        const auto decoded = q_decode(msg.q_encoded_header, ctx.redundancy, *ctx.rng);
        if (decoded.bits.size() % 8 != 0) {
            outcome = VerificationOutcome::reject(Rejection::malformed, "header is not a whole number of bytes");
            return std::nullopt;
        }
        return parse_fields(step, bits_to_bytes(decoded.bits));
    } catch (const std::exception& e) {
        outcome = VerificationOutcome::reject(Rejection::malformed, e.what());
        return std::nullopt;
    }
}

template <typename Parse>
auto open_sealed(const Cipher& cipher, const SymmetricKey& key, const EncryptedBlock& block, Parse parse,
                 VerificationOutcome& outcome, const char* what) -> std::optional<decltype(parse(Bytes{}))> {
    const auto plain = cipher.decrypt(key, block);
    if (!plain) {
        outcome = VerificationOutcome::reject(Rejection::integrity, std::string(what) + ": tag check failed");
        return std::nullopt;
    }
    try {
        return parse(*plain);
    } catch (const std::exception& e) {
        outcome = VerificationOutcome::reject(Rejection::malformed, std::string(what) + ": " + e.what());
        return std::nullopt;
    }
}

Verified verify_step1(const Step1Fields& f, const VerifyContext& ctx) {
    Verified v;
    if (ctx.cache && ctx.cache->contains(f.id_a, f.n_a)) {
        v.outcome = VerificationOutcome::reject(Rejection::replayed_nonce, "N_a already seen from " + f.id_a.str());
        return v;
    }
    if (ctx.expected_peer && *ctx.expected_peer != f.id_a) {
        v.outcome = VerificationOutcome::reject(Rejection::id_mismatch, "unexpected initiator " + f.id_a.str());
        return v;
    }
    if (ctx.cache) ctx.cache->insert(f.id_a, f.n_a);
    v.peer = f.id_a;
    v.peer_nonce = f.n_a;
    return v;
}

Verified verify_step2(const Step2Fields& f, const VerifyContext& ctx) {
    Verified v;
    if (ctx.directory == nullptr) throw std::invalid_argument("verify_message: step 2 needs a key directory");
    const auto kb = ctx.directory->find(f.id_b);
    if (kb == ctx.directory->end()) {
        v.outcome = VerificationOutcome::reject(Rejection::unknown_party, "no key registered for " + f.id_b.str());
        return v;
    }
    const auto req = open_sealed(*ctx.cipher, kb->second, f.kdc_request, parse_kdc_request, v.outcome, "E_Kb[ID_A||N_a||T_b]");
    if (!req) return v;
    if (ctx.directory->find(req->id_a) == ctx.directory->end()) {
        v.outcome = VerificationOutcome::reject(Rejection::unknown_party, "no key registered for " + req->id_a.str());
        return v;
    }
    if (!ctx.policy.fresh(req->t_b, ctx.now)) {
        v.outcome = VerificationOutcome::reject(Rejection::stale_timestamp, "T_b outside the freshness window");
        return v;
    }
    if (ctx.cache && ctx.cache->contains(f.id_b, f.n_b)) {
        v.outcome = VerificationOutcome::reject(Rejection::replayed_nonce, "N_b already seen from " + f.id_b.str());
        return v;
    }
    if (ctx.cache) ctx.cache->insert(f.id_b, f.n_b);
    v.peer = f.id_b;
    v.peer_nonce = f.n_b;
    v.t_b = req->t_b;
    v.kdc_request = *req;
    return v;
}

Verified verify_step3(const Step3Fields& f, const VerifyContext& ctx) {
    Verified v;
    if (!ctx.long_term_key || !ctx.self) throw std::invalid_argument("verify_message: step 3 needs self and K_a");
    const auto pkg = open_sealed(*ctx.cipher, *ctx.long_term_key, f.alice_package, parse_alice_package, v.outcome,
                                 "E_Ka[ID_B||N_a||K_s||T_b]");
    if (!pkg) return v;
    if (ctx.cache && ctx.cache->contains(*ctx.self, pkg->n_a)) {
        v.outcome = VerificationOutcome::reject(Rejection::replayed_nonce, "N_a was already consumed");
        return v;
    }
    if (ctx.expected_peer && *ctx.expected_peer != pkg->id_b) {
        v.outcome = VerificationOutcome::reject(Rejection::id_mismatch, "package names " + pkg->id_b.str());
        return v;
    }
    if (!ctx.issued_nonce || *ctx.issued_nonce != pkg->n_a) {
        v.outcome = VerificationOutcome::reject(Rejection::nonce_mismatch, "N_a does not match the issued nonce");
        return v;
    }
    if (!ctx.policy.fresh(pkg->t_b, ctx.now)) {
        v.outcome = VerificationOutcome::reject(Rejection::stale_timestamp, "T_b outside the freshness window");
        return v;
    }
    if (ctx.cache) ctx.cache->insert(*ctx.self, pkg->n_a);
    v.peer = pkg->id_b;
    v.peer_nonce = f.n_b;
    v.session_key = pkg->k_s;
    v.t_b = pkg->t_b;
    v.ticket = f.ticket;
    return v;
}

Verified verify_step4(const Step4Fields& f, const VerifyContext& ctx) {
    Verified v;
    if (!ctx.long_term_key || !ctx.self) throw std::invalid_argument("verify_message: step 4 needs self and K_b");
    const auto ticket = open_sealed(*ctx.cipher, *ctx.long_term_key, f.ticket, parse_ticket, v.outcome, "E_Kb[ID_A||K_s||T_b]");
    if (!ticket) return v;
    const auto n_b = open_sealed(*ctx.cipher, ticket->k_s, f.nonce_proof, parse_nonce, v.outcome, "E_Ks[N_b]");
    if (!n_b) return v;
    if (ctx.cache && ctx.cache->contains(*ctx.self, *n_b)) {
        v.outcome = VerificationOutcome::reject(Rejection::replayed_nonce, "N_b was already consumed");
        return v;
    }
    if (ctx.expected_peer && *ctx.expected_peer != ticket->id_a) {
        v.outcome = VerificationOutcome::reject(Rejection::id_mismatch, "ticket names " + ticket->id_a.str());
        return v;
    }
    if (!ctx.policy.fresh(ticket->t_b, ctx.now)) {
        v.outcome = VerificationOutcome::reject(Rejection::stale_timestamp, "T_b outside the freshness window");
        return v;
    }
    if (!ctx.issued_nonce || *ctx.issued_nonce != *n_b) {
        v.outcome = VerificationOutcome::reject(Rejection::nonce_mismatch, "N_b does not match the issued nonce");
        return v;
    }
    if (ctx.cache) ctx.cache->insert(*ctx.self, *n_b);
    v.peer = ticket->id_a;
    v.session_key = ticket->k_s;
    v.t_b = ticket->t_b;
    return v;
}

}  // namespace

// ---- Q(.) ----

std::vector<StateVector> q_encode(std::span<const std::uint8_t> bits, std::size_t redundancy) {
    if (redundancy < 1) throw std::invalid_argument("q_encode: redundancy must be >= 1");
    std::vector<StateVector> out;
    out.reserve(bits.size() * redundancy);
    for (auto b : bits)
        for (std::size_t r = 0; r < redundancy; ++r) out.push_back(StateVector::basis_state(1, b ? 1 : 0));
    return out;
}

QDecoded q_decode(std::span<const StateVector> states, std::size_t redundancy, RandomStream& rng) {
    if (redundancy < 1) throw std::invalid_argument("q_decode: redundancy must be >= 1");
    if (states.size() % redundancy != 0) throw std::invalid_argument("q_decode: length is not a multiple of redundancy");
    QDecoded out;
    out.bits.reserve(states.size() / redundancy);
    for (std::size_t g = 0; g < states.size(); g += redundancy) {
        std::size_t ones = 0;
        for (std::size_t r = 0; r < redundancy; ++r) ones += static_cast<std::size_t>(measure(states[g + r], Basis::rectilinear, rng).first);
        const std::size_t zeros = redundancy - ones;
        if (ones == zeros) out.degenerate = true;
        out.bits.push_back(ones > zeros ? 1 : 0);
    }
    return out;
}

// ---- freshness / nonce cache ----

bool ClockPolicy::fresh(Timestamp stamped, Timestamp now) const noexcept {
    const std::uint64_t diff = stamped.millis > now.millis ? stamped.millis - now.millis : now.millis - stamped.millis;
    return diff <= window_millis;
}

bool NonceCache::contains(const PartyId& issuer, Nonce n) const { return seen_.count({issuer.str(), n.value}) != 0; }

bool NonceCache::insert(const PartyId& issuer, Nonce n) { return seen_.insert({issuer.str(), n.value}).second; }

// ---- rejections ----

std::string to_string(Rejection r) {
    switch (r) {
        case Rejection::integrity: return "integrity";
        case Rejection::replayed_nonce: return "replayed_nonce";
        case Rejection::stale_timestamp: return "stale_timestamp";
        case Rejection::id_mismatch: return "id_mismatch";
        case Rejection::nonce_mismatch: return "nonce_mismatch";
        case Rejection::unknown_party: return "unknown_party";
        case Rejection::malformed: return "malformed";
        case Rejection::missing_payload: return "missing_payload";
        case Rejection::kdc_unreachable: return "kdc_unreachable";
        case Rejection::duplicate_event: return "duplicate_event";
        case Rejection::no_response: return "no_response";
    }
    return "unknown";
}

std::optional<Rejection> parse_rejection(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(Rejection::no_response); ++i) {
        const auto r = static_cast<Rejection>(i);
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

// ---- building ----

AuthMessage assemble(ClassicalFields fields, std::vector<StateVector> payload, std::size_t redundancy) {
    AuthMessage m;
    m.step = step_of(fields);
    m.q_encoded_header = q_encode(bytes_to_bits(serialize(fields)), redundancy);
    m.fields = std::move(fields);
    m.qubit_payload = std::move(payload);
    return m;
}

AuthMessage build_message(int step, const MessageContext& ctx) {
    std::vector<std::string> missing;
    const auto need = [&missing](bool present, const char* name) {
        if (!present) missing.emplace_back(name);
    };
    switch (step) {
        case 1:
            need(ctx.id_a.has_value(), "id_a");
            need(ctx.n_a.has_value(), "n_a");
            break;
        case 2:
            need(ctx.id_a.has_value(), "id_a");
            need(ctx.id_b.has_value(), "id_b");
            need(ctx.n_a.has_value(), "n_a");
            need(ctx.n_b.has_value(), "n_b");
            need(ctx.t_b.has_value(), "t_b");
            need(ctx.k_b.has_value(), "k_b");
            break;
        case 3:
            need(ctx.id_a.has_value(), "id_a");
            need(ctx.id_b.has_value(), "id_b");
            need(ctx.n_a.has_value(), "n_a");
            need(ctx.n_b.has_value(), "n_b");
            need(ctx.t_b.has_value(), "t_b");
            need(ctx.k_a.has_value(), "k_a");
            need(ctx.k_b.has_value(), "k_b");
            need(ctx.k_s.has_value(), "k_s");
            break;
        case 4:
            need(ctx.ticket.has_value(), "ticket");
            need(ctx.k_s.has_value(), "k_s");
            need(ctx.n_b.has_value(), "n_b");
            break;
        default: throw std::invalid_argument("build_message: step must be 1..4");
    }
    if (!missing.empty())
        throw MissingContext("build_message step " + std::to_string(step) + ": missing " + join(missing));

    const Cipher& cipher = *ctx.cipher;
    switch (step) {
        case 1: return assemble(Step1Fields{*ctx.id_a, *ctx.n_a}, ctx.payload, ctx.redundancy);
        case 2: {
            auto sealed = cipher.encrypt(*ctx.k_b, serialize(KdcRequest{*ctx.id_a, *ctx.n_a, *ctx.t_b}));
            return assemble(Step2Fields{*ctx.id_b, *ctx.n_b, std::move(sealed)}, ctx.payload, ctx.redundancy);
        }
        case 3: {
            auto pkg = cipher.encrypt(*ctx.k_a, serialize(AlicePackage{*ctx.id_b, *ctx.n_a, *ctx.k_s, *ctx.t_b}));
            auto ticket = cipher.encrypt(*ctx.k_b, serialize(Ticket{*ctx.id_a, *ctx.k_s, *ctx.t_b}));
            return assemble(Step3Fields{std::move(pkg), std::move(ticket), *ctx.n_b}, ctx.payload, ctx.redundancy);
        }
        default: {
            auto proof = cipher.encrypt(*ctx.k_s, serialize_nonce(*ctx.n_b));
            return assemble(Step4Fields{*ctx.ticket, std::move(proof)}, ctx.payload, ctx.redundancy);
        }
    }
}

// ---- verification ----

Verified verify_message(int step, const AuthMessage& msg, const VerifyContext& ctx) {
    Verified v;
    const auto fields = read_header(step, msg, ctx, v.outcome);
    if (!fields) return v;
    switch (step) {
        case 1: v = verify_step1(std::get<Step1Fields>(*fields), ctx); break;
        case 2: v = verify_step2(std::get<Step2Fields>(*fields), ctx); break;
        case 3: v = verify_step3(std::get<Step3Fields>(*fields), ctx); break;
        case 4: v = verify_step4(std::get<Step4Fields>(*fields), ctx); break;
        default: throw std::invalid_argument("verify_message: step must be 1..4");
    }
    v.fields = *fields;
    return v;
}

KdcIssue kdc_issue_session(const AuthMessage& msg2, const KdcContext& kdc) {
    if (kdc.rng == nullptr) throw std::invalid_argument("kdc_issue_session: context has no RandomStream");
    VerifyContext vc;
    vc.self = kdc.self;
    vc.directory = &kdc.directory;
    vc.now = kdc.now;
    vc.policy = kdc.policy;
    vc.cache = kdc.cache;
    vc.redundancy = kdc.redundancy;
    vc.cipher = kdc.cipher;
    vc.rng = kdc.rng;

    KdcIssue out;
    const auto v = verify_message(2, msg2, vc);
    out.outcome = v.outcome;
    if (!v.outcome.accepted) return out;

    const auto& req = *v.kdc_request;
    const SymmetricKey k_s = SymmetricKey::random(*kdc.rng);
    const auto& k_a = kdc.directory.at(req.id_a);
    const auto& k_b = kdc.directory.at(*v.peer);
    auto pkg = kdc.cipher->encrypt(k_a, serialize(AlicePackage{*v.peer, req.n_a, k_s, req.t_b}));
    auto ticket = kdc.cipher->encrypt(k_b, serialize(Ticket{req.id_a, k_s, req.t_b}));
    out.fields = Step3Fields{std::move(pkg), std::move(ticket), *v.peer_nonce};
    out.session_key = k_s;
    out.id_a = req.id_a;
    return out;
}

}  // namespace qkdsim::auth
