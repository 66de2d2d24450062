#include "cefac/json_io.hpp"

namespace cefac {

using nlohmann::json;

json mass_to_json(const MassFunction& m) {
    json j;
    j["frame"] = m.frame().events();
    json masses = json::object();
    for (std::uint32_t a = 0; a < m.frame().subset_count(); ++a) {
        const double v = m.masses()[a];
        if (a == 0 && v == 0.0) continue;  // empty set omitted when zero
        if (v == 0.0) continue;
        masses[m.frame().subset_label(a)] = v;
    }
    j["masses"] = masses;
    return j;
}

MassFunction mass_from_json(const json& j) {
    FrameOfDiscernment frame(j.at("frame").get<std::vector<std::string>>());
    std::vector<double> masses(frame.subset_count(), 0.0);
    for (auto it = j.at("masses").begin(); it != j.at("masses").end(); ++it) {
        masses[frame.subset_from_label(it.key())] += it.value().get<double>();
    }
    return MassFunction(std::move(frame), std::move(masses));
}

json wavccme_to_json(const WavccmeMatrix& w) {
    json j;
    j["frame"] = w.frame().events();
    json columns = json::array();
    for (std::size_t e = 0; e < w.frame().size(); ++e) {
        json col;
        col["event"] = w.frame().event_label(e);
        json masses = json::object();
        for (std::uint32_t a = 1; a < w.frame().subset_count(); ++a) {
            const double v = w.values().at(a - 1, e);
            if (v != 0.0) masses[w.frame().subset_label(a)] = v;
        }
        col["masses"] = masses;
        columns.push_back(col);
    }
    j["columns"] = columns;
    return j;
}

namespace {

json storage_vector_to_json(const protocol::StorageVector& v) {
    json slots = json::array();
    for (const auto& s : v.slots) {
        if (s) slots.push_back(*s);
        else slots.push_back(nullptr);
    }
    return slots;
}

protocol::StorageVector storage_vector_from_json(const json& j) {
    protocol::StorageVector v(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_null()) v.slots[k] = j[k].get<std::vector<double>>();
    }
    return v;
}

json correction_record_to_json(const protocol::CorrectionRecord& r) {
    json j;
    j["owner"] = r.owner;
    j["version"] = r.version;
    j["dos"] = r.dos;
    j["deception"] = r.deception;
    json comps = json::object();
    for (const auto& [attacker, vec] : r.corrections) {
        comps[std::to_string(attacker)] = vec;
    }
    j["corrections"] = comps;
    return j;
}

protocol::CorrectionRecord correction_record_from_json(const json& j) {
    protocol::CorrectionRecord r;
    r.owner = j.at("owner").get<std::size_t>();
    r.version = j.at("version").get<int>();
    for (const auto& v : j.at("dos")) r.dos.insert(v.get<std::size_t>());
    for (const auto& v : j.at("deception")) r.deception.insert(v.get<std::size_t>());
    for (auto it = j.at("corrections").begin(); it != j.at("corrections").end(); ++it) {
        r.corrections[std::stoull(it.key())] = it.value().get<std::vector<double>>();
    }
    return r;
}

}  // namespace

json message_to_json(const protocol::Message& m) {
    json j;
    j["v"] = 1;
    j["round"] = m.round;
    j["from"] = m.from;
    j["to"] = m.to;
    switch (m.kind) {
        case protocol::MessageKind::SubState: {
            j["kind"] = "substate";
            j["payload"] = {{"share", std::get<protocol::SubStatePayload>(m.payload).share}};
            break;
        }
        case protocol::MessageKind::Weight: {
            j["kind"] = "weight";
            const auto& wp = std::get<protocol::WeightPayload>(m.payload);
            json p;
            if (wp.cipher) {
                p["cipher"] = wp.cipher->value.get_str();
                p["key_id"] = wp.cipher->key_id;
            }
            if (wp.plain) p["plain"] = *wp.plain;
            j["payload"] = p;
            break;
        }
        case protocol::MessageKind::Storage: {
            j["kind"] = "storage";
            j["payload"] = {{"slots", storage_vector_to_json(std::get<protocol::StoragePayload>(m.payload).vec)}};
            break;
        }
        case protocol::MessageKind::Correction: {
            j["kind"] = "correction";
            json slots = json::array();
            for (const auto& s : std::get<protocol::CorrectionPayload>(m.payload).vec.slots) {
                if (s) slots.push_back(correction_record_to_json(*s));
                else slots.push_back(nullptr);
            }
            j["payload"] = {{"slots", slots}};
            break;
        }
    }
    return j;
}

protocol::Message message_from_json(const json& j) {
    if (j.value("v", 0) != 1) {
        throw ProtocolViolation("unsupported message version");
    }
    protocol::Message m;
    m.round = j.at("round").get<std::size_t>();
    m.from = j.at("from").get<std::size_t>();
    m.to = j.at("to").get<std::size_t>();
    const std::string kind = j.at("kind").get<std::string>();
    const json& p = j.at("payload");
    if (kind == "substate") {
        m.kind = protocol::MessageKind::SubState;
        m.payload = protocol::SubStatePayload{p.at("share").get<std::vector<double>>()};
    } else if (kind == "weight") {
        m.kind = protocol::MessageKind::Weight;
        protocol::WeightPayload wp;
        if (p.contains("cipher")) {
            wp.cipher = paillier::Ciphertext{mpz_class(p.at("cipher").get<std::string>()),
                                             p.value("key_id", std::uint32_t{0})};
        }
        if (p.contains("plain")) wp.plain = p.at("plain").get<long>();
        m.payload = std::move(wp);
    } else if (kind == "storage") {
        m.kind = protocol::MessageKind::Storage;
        m.payload = protocol::StoragePayload{storage_vector_from_json(p.at("slots"))};
    } else if (kind == "correction") {
        m.kind = protocol::MessageKind::Correction;
        protocol::CorrectionVector v(p.at("slots").size());
        for (std::size_t k = 0; k < v.slots.size(); ++k) {
            if (!p.at("slots")[k].is_null()) {
                v.slots[k] = correction_record_from_json(p.at("slots")[k]);
            }
        }
        m.payload = protocol::CorrectionPayload{std::move(v)};
    } else {
        throw ProtocolViolation("unknown message kind '" + kind + "'");
    }
    return m;
}

json fusion_result_to_json(const FusionResult& r) {
    json j;
    j["m_fused"] = mass_to_json(r.m_fused);
    json probs = json::object();
    for (std::size_t e = 0; e < r.m_fused.frame().size(); ++e) {
        probs[r.m_fused.frame().event_label(e)] = r.event_probs[e];
    }
    j["event_probs"] = probs;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    return j;
}

}  // namespace cefac
