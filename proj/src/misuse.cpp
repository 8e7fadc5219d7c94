#include "nlab/misuse.hpp"

#include <algorithm>

namespace nlab::misuse {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

std::string_view to_string(PresenceBelief b)
{
    switch (b) {
    case PresenceBelief::pseudomonopresent: return "pseudomonopresent";
    case PresenceBelief::almost_pseudomonopresent: return "almost_pseudomonopresent";
    case PresenceBelief::multipresent: return "multipresent";
    case PresenceBelief::absent: return "absent";
    }
    return "unknown";
}

std::string_view to_string(Legality l)
{
    return l == Legality::legal ? "legal" : "illegal";
}

std::string_view to_string(Tag t)
{
    return t == Tag::donation ? "donation" : "extortion";
}

std::string_view to_string(MoneyMode m)
{
    return m == MoneyMode::exim ? "exim" : "non_exim";
}

std::string_view to_string(PatternLabel p)
{
    switch (p) {
    case PatternLabel::CoA_only: return "CoA_only";
    case PatternLabel::CoA_SCC: return "CoA_SCC";
    case PatternLabel::CoA_DoA: return "CoA_DoA";
    case PatternLabel::pseudo_theft: return "pseudo_theft";
    case PatternLabel::incidentally_legalized_pseudo_theft: return "incidentally_legalized_pseudo_theft";
    case PatternLabel::theft: return "theft";
    }
    return "unknown";
}

MoneyMode mode_from_string(std::string_view s)
{
    if (s == "exim" || s == "EXIM") return MoneyMode::exim;
    if (s == "non_exim" || s == "non-exim" || s == "non_EXIM") return MoneyMode::non_exim;
    throw std::invalid_argument("unknown money mode: " + std::string(s));
}

std::string describe(const MisuseEvent& e)
{
    return event_to_json(e).dump();
}

CustodyWorld::CustodyWorld(std::vector<AgentId> agents, const std::vector<KeySetup>& keys) : agents_(std::move(agents))
{
    std::set<AgentId> seen(agents_.begin(), agents_.end());
    if (seen.size() != agents_.size()) throw std::invalid_argument("duplicate agent");
    std::vector<std::pair<Address, Amount>> genesis;
    for (const auto& k : keys) {
        if (key_pairs_.count(k.id)) throw std::invalid_argument("duplicate key " + k.id);
        const auto pair = keygen("nlab/misuse/key/" + k.id);
        key_pairs_.emplace(k.id, pair);
        holders_[k.id];
        if (k.balance.value() > 0) genesis.emplace_back(pair.address, k.balance);
        if (!k.owner) continue;
        require_agent(*k.owner);
        holders_[k.id].insert(*k.owner);
        beliefs_[{*k.owner, k.id}] = PresenceBelief::pseudomonopresent;
        if (k.announced) {
            announced_.insert({*k.owner, k.id});
            for (const auto& o : agents_)
                if (o != *k.owner) links_[{o, k.id}] = *k.owner;
        }
    }
    ledger_ = LedgerState::genesis(genesis, Address{});
}

void CustodyWorld::require_agent(const AgentId& a) const
{
    if (std::find(agents_.begin(), agents_.end(), a) == agents_.end())
        throw PreconditionViolated("unknown agent " + a);
}

void CustodyWorld::require_key(const KeyId& k) const
{
    if (!key_pairs_.count(k)) throw PreconditionViolated("unknown key " + k);
}

void CustodyWorld::lower_belief(const AgentId& a, const KeyId& k, PresenceBelief to)
{
    auto& b = beliefs_[{a, k}];
    b = std::max(b, to);
}

std::vector<KeyId> CustodyWorld::keys() const
{
    std::vector<KeyId> out;
    for (const auto& [k, _] : key_pairs_) out.push_back(k);
    return out;
}

const std::set<AgentId>& CustodyWorld::holders(const KeyId& k) const
{
    require_key(k);
    return holders_.at(k);
}

std::optional<PresenceBelief> CustodyWorld::belief(const AgentId& a, const KeyId& k) const
{
    const auto it = beliefs_.find({a, k});
    if (it == beliefs_.end()) return std::nullopt;
    return it->second;
}

std::optional<AgentId> CustodyWorld::link(const AgentId& observer, const KeyId& k) const
{
    const auto it = links_.find({observer, k});
    if (it == links_.end()) return std::nullopt;
    return it->second;
}

std::set<Tag> CustodyWorld::contamination(const KeyId& k) const
{
    const auto it = contamination_.find(k);
    return it == contamination_.end() ? std::set<Tag>{} : it->second;
}

bool CustodyWorld::suspended(const AgentId& a, const KeyId& k) const
{
    return suspended_.count({a, k}) > 0;
}

std::optional<AgentId> CustodyWorld::mu_target(std::size_t event) const
{
    const auto it = mu_targets_.find(event);
    if (it == mu_targets_.end()) return std::nullopt;
    return it->second;
}

Amount CustodyWorld::balance(const KeyId& k) const
{
    return ledger_.balance(address(k));
}

Amount CustodyWorld::accessible_balance(const AgentId& a) const
{
    Amount total;
    for (const auto& [k, hs] : holders_)
        if (hs.count(a) && !suspended(a, k)) total += balance(k);
    return total;
}

const Address& CustodyWorld::address(const KeyId& k) const
{
    require_key(k);
    return key_pairs_.at(k).address;
}

void CustodyWorld::apply(const MisuseEvent& e)
{
    const std::size_t index = history_.size();
    std::visit(
        overloaded{
            [&](const CoA& ev) {
                require_agent(ev.actor);
                require_key(ev.key);
                auto& hs = holders_[ev.key];
                if (hs.count(ev.actor)) throw PreconditionViolated("CoA: actor already holds the key");
                if (hs.empty()) throw PreconditionViolated("CoA: no copy of the secret key exists");
                for (const auto& h : hs) lower_belief(h, ev.key, PresenceBelief::multipresent);
                hs.insert(ev.actor);
                beliefs_[{ev.actor, ev.key}] = PresenceBelief::multipresent;
            },
            [&](const SCC& ev) {
                require_agent(ev.actor);
                require_key(ev.key);
                require_key(ev.dest);
                if (!holders_[ev.key].count(ev.actor)) throw PreconditionViolated("SCC: actor does not hold the key");
                if (suspended(ev.actor, ev.key)) throw PreconditionViolated("SCC: actor's access is suspended");
                if (ev.dest == ev.key) throw PreconditionViolated("SCC: destination equals source");
                if (ev.amount > balance(ev.key)) throw PreconditionViolated("SCC: amount exceeds q(k)");
                const auto& keys = key_pairs_.at(ev.key);
                ledger_.submit_transfer(make_transfer(keys, ev.amount, address(ev.dest)), std::nullopt);
            },
            [&](const DoA& ev) {
                require_agent(ev.actor);
                require_agent(ev.victim);
                require_key(ev.key);
                auto& hs = holders_[ev.key];
                if (ev.actor == ev.victim) throw PreconditionViolated("DoA: actor and victim coincide");
                if (!hs.count(ev.victim)) throw PreconditionViolated("DoA: victim does not hold the key");
                if (ev.mode == BlockMode::temporary) {
                    if (suspended(ev.victim, ev.key)) throw PreconditionViolated("DoA: access already suspended");
                    suspended_.insert({ev.victim, ev.key});
                    return;
                }
                hs.erase(ev.victim);
                suspended_.erase({ev.victim, ev.key});
                if (hs.empty()) {
                    for (auto& [ak, b] : beliefs_)
                        if (ak.second == ev.key) b = PresenceBelief::absent;
                    unrecoverable_.insert(ev.key);
                } else {
                    lower_belief(ev.victim, ev.key, PresenceBelief::multipresent);
                }
            },
            [&](const Restore& ev) {
                require_agent(ev.victim);
                require_key(ev.key);
                if (!suspended(ev.victim, ev.key)) throw PreconditionViolated("Restore: access is not suspended");
                suspended_.erase({ev.victim, ev.key});
            },
            [&](const ML& ev) {
                require_agent(ev.actor);
                require_agent(ev.observer);
                require_agent(ev.purported);
                require_key(ev.key);
                if (ev.observer == ev.purported) throw PreconditionViolated("ML: observer and purported coincide");
                if (holders_[ev.key] == std::set<AgentId>{ev.purported})
                    throw PreconditionViolated("ML: purported controller is in fact in exclusive control");
                links_[{ev.observer, ev.key}] = ev.purported;
            },
            [&](const MU& ev) {
                require_agent(ev.actor);
                require_agent(ev.observer);
                require_key(ev.key);
                const auto it = links_.find({ev.observer, ev.key});
                if (it == links_.end() || !holders_[ev.key].count(it->second))
                    throw PreconditionViolated("MU: observer holds no true link for the key");
                mu_targets_[index] = it->second;
                links_.erase(it);
            },
            [&](const ContaminatingDonation& ev) {
                require_agent(ev.actor);
                require_key(ev.key);
                ledger_.credit_subsidy(address(ev.key), ev.amount);
                contamination_[ev.key].insert(Tag::donation);
            },
            [&](const ContaminatingExtortion& ev) {
                require_agent(ev.actor);
                require_key(ev.key);
                ledger_.credit_subsidy(address(ev.key), ev.amount);
                contamination_[ev.key].insert(Tag::extortion);
            },
            [&](const Announce& ev) {
                require_agent(ev.agent);
                require_key(ev.key);
                if (!holders_[ev.key].count(ev.agent)) throw PreconditionViolated("Announce: agent does not hold the key");
                announced_.insert({ev.agent, ev.key});
                for (const auto& o : agents_)
                    if (o != ev.agent) links_[{o, ev.key}] = ev.agent;
            },
            [&](const DenyLink& ev) {
                require_agent(ev.agent);
                require_key(ev.key);
                announced_.erase({ev.agent, ev.key});
                for (auto it = links_.begin(); it != links_.end();) {
                    if (it->first.second == ev.key && it->second == ev.agent)
                        it = links_.erase(it);
                    else
                        ++it;
                }
            },
            [&](const StoreBackup& ev) {
                require_agent(ev.agent);
                require_key(ev.key);
                if (!holders_[ev.key].count(ev.agent) || suspended(ev.agent, ev.key))
                    throw PreconditionViolated("StoreBackup: agent has no access to the key");
                auto& b = beliefs_[{ev.agent, ev.key}];
                if (b == PresenceBelief::pseudomonopresent) b = PresenceBelief::almost_pseudomonopresent;
            },
            [&](const Safeguard& ev) {
                require_agent(ev.agent);
                require_key(ev.key);
                if (!holders_[ev.key].count(ev.agent)) throw PreconditionViolated("Safeguard: agent does not hold the key");
            },
            [&](const Remediate& ev) {
                require_agent(ev.agent);
                if (ev.event >= index) throw PreconditionViolated("Remediate: no such earlier event");
                if (remedied(ev.event)) throw PreconditionViolated("Remediate: already remedied");
                const auto& target = history_[ev.event].body;
                if (const auto* ml = std::get_if<ML>(&target)) {
                    const auto it = links_.find({ml->observer, ml->key});
                    if (it != links_.end() && it->second == ml->purported) {
                        std::optional<AgentId> truth;
                        for (const auto& [who, key] : announced_)
                            if (key == ml->key && holders_[ml->key].count(who)) truth = who;
                        if (truth && *truth != ml->observer)
                            it->second = *truth;
                        else
                            links_.erase(it);
                    }
                } else if (const auto* mu = std::get_if<MU>(&target)) {
                    const auto& who = mu_targets_.at(ev.event);
                    if (holders_[mu->key].count(who)) links_[{mu->observer, mu->key}] = who;
                } else {
                    throw PreconditionViolated("Remediate: target is neither ML nor MU");
                }
                remedied_.insert(ev.event);
            },
        },
        e.body);
    history_.push_back(e);
}

Json CustodyWorld::to_json() const
{
    Json holders = Json::object();
    for (const auto& [k, hs] : holders_) holders[k] = hs;
    Json beliefs = Json::array();
    for (const auto& [ak, b] : beliefs_)
        beliefs.push_back({{"agent", ak.first}, {"key", ak.second}, {"belief", std::string(to_string(b))}});
    Json links = Json::array();
    for (const auto& [ok, a] : links_) links.push_back({{"observer", ok.first}, {"key", ok.second}, {"agent", a}});
    Json contamination = Json::object();
    for (const auto& [k, tags] : contamination_) {
        Json t = Json::array();
        for (const auto tag : tags) t.push_back(std::string(to_string(tag)));
        contamination[k] = t;
    }
    Json suspended = Json::array();
    for (const auto& [a, k] : suspended_) suspended.push_back({{"agent", a}, {"key", k}});
    Json balances = Json::object();
    for (const auto& [k, _] : key_pairs_) balances[k] = balance(k);
    return {{"holders", holders},         {"beliefs", beliefs},       {"links", links},
            {"contamination", contamination}, {"suspended", suspended}, {"unrecoverable", unrecoverable_},
            {"balances", balances},       {"fee_accruals", ledger_.total_fee_accruals()}};
}

std::vector<Classification> classify_history(const std::vector<MisuseEvent>& history, MoneyMode mode)
{
    std::vector<Classification> out;
    std::set<std::size_t> paired;
    auto latest_coa = [&](std::size_t before, const AgentId& actor, const KeyId& key) -> std::optional<std::size_t> {
        for (std::size_t i = before; i-- > 0;) {
            const auto* c = std::get_if<CoA>(&history[i].body);
            if (c && c->actor == actor && c->key == key) return i;
        }
        return std::nullopt;
    };
    for (std::size_t j = 0; j < history.size(); ++j) {
        const auto& e = history[j];
        if (const auto* s = std::get_if<SCC>(&e.body)) {
            const auto i = latest_coa(j, s->actor, s->key);
            if (!i) continue;
            paired.insert(*i);
            const std::vector<std::size_t> idx{*i, j};
            out.push_back({PatternLabel::CoA_SCC, idx});
            const bool illegal = history[*i].legality == Legality::illegal || e.legality == Legality::illegal;
            if (!illegal) {
                out.push_back({PatternLabel::incidentally_legalized_pseudo_theft, idx});
                continue;
            }
            out.push_back({PatternLabel::pseudo_theft, idx});
            if (mode == MoneyMode::non_exim) out.push_back({PatternLabel::theft, idx});
        } else if (const auto* d = std::get_if<DoA>(&e.body)) {
            const auto i = latest_coa(j, d->actor, d->key);
            if (!i) continue;
            paired.insert(*i);
            out.push_back({PatternLabel::CoA_DoA, {*i, j}});
        }
    }
    for (std::size_t i = 0; i < history.size(); ++i)
        if (std::holds_alternative<CoA>(history[i].body) && !paired.count(i))
            out.push_back({PatternLabel::CoA_only, {i}});
    std::sort(out.begin(), out.end(), [](const Classification& a, const Classification& b) {
        return a.events != b.events ? a.events < b.events : a.label < b.label;
    });
    return out;
}

std::vector<Classification> classify(const CustodyWorld& initial, const std::vector<MisuseEvent>& events,
                                     MoneyMode mode)
{
    CustodyWorld world = initial;
    for (std::size_t i = 0; i < events.size(); ++i) {
        try {
            world.apply(events[i]);
        } catch (const std::exception& ex) {
            throw InvalidSequence(i, ex.what());
        }
    }
    return classify_history(world.history(), mode);
}

std::vector<int> check_defensive_policy(const CustodyWorld& world, const AgentId& agent, const KeyId& k,
                                        std::size_t deadline)
{
    const auto& h = world.history();
    auto remedied_in_time = [&](std::size_t idx) {
        for (std::size_t j = idx + 1; j < h.size() && j <= idx + deadline; ++j) {
            const auto* r = std::get_if<Remediate>(&h[j].body);
            if (r && r->agent == agent && r->event == idx) return true;
        }
        return false;
    };

    std::optional<std::size_t> first_coa;
    bool unguarded_coa = false;
    bool safeguarded = false;
    bool backup = false;
    bool doa = false;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto& body = h[i].body;
        if (const auto* c = std::get_if<CoA>(&body); c && c->key == k && c->actor != agent) {
            if (!first_coa) first_coa = i;
            unguarded_coa |= !safeguarded;
        }
        if (const auto* s = std::get_if<Safeguard>(&body); s && s->agent == agent && s->key == k) safeguarded = true;
        if (const auto* b = std::get_if<StoreBackup>(&body); b && b->agent == agent && b->key == k) backup = true;
        if (const auto* d = std::get_if<DoA>(&body); d && d->victim == agent && d->key == k) doa = true;
    }
    bool denied_after_coa = false;
    bool stale_ml_after_coa = false;
    if (first_coa) {
        for (std::size_t i = *first_coa + 1; i < h.size(); ++i) {
            if (const auto* d = std::get_if<DenyLink>(&h[i].body); d && d->agent == agent && d->key == k)
                denied_after_coa = true;
            if (const auto* m = std::get_if<ML>(&h[i].body);
                m && m->key == k && m->purported == agent && !remedied_in_time(i))
                stale_ml_after_coa = true;
        }
    }

    std::set<int> v;
    if (!world.announcement_active(agent, k) && !(first_coa && denied_after_coa)) v.insert(1);
    if (unguarded_coa) v.insert(2);
    if (!backup) v.insert(3);
    if (first_coa) v.insert(4);
    if (first_coa) {
        const bool can_secure = world.holders(k).count(agent) && !world.suspended(agent, k);
        if (!denied_after_coa || stale_ml_after_coa || (can_secure && world.balance(k).value() > 0)) v.insert(5);
    }
    if (doa) v.insert(6);

    const auto& hs = world.holders(k);
    const auto belief = world.belief(agent, k);
    bool consistent = false;
    if (belief) {
        switch (*belief) {
        case PresenceBelief::pseudomonopresent:
        case PresenceBelief::almost_pseudomonopresent: consistent = hs == std::set<AgentId>{agent}; break;
        case PresenceBelief::multipresent: consistent = hs.size() > 1 || !hs.count(agent); break;
        case PresenceBelief::absent: consistent = !hs.count(agent); break;
        }
    }
    if (!v.empty() || !consistent) v.insert(7);

    for (std::size_t i = 0; i < h.size(); ++i) {
        if (const auto* m = std::get_if<ML>(&h[i].body)) {
            if (m->key == k && m->purported != agent && !remedied_in_time(i)) v.insert(8);
            if (m->key != k && m->purported == agent && !remedied_in_time(i)) v.insert(9);
        }
        if (const auto* u = std::get_if<MU>(&h[i].body)) {
            if (u->key == k && world.mu_target(i) == agent && !remedied_in_time(i)) v.insert(10);
        }
    }
    return {v.begin(), v.end()};
}

namespace {

std::string field_string(const Json& j, const char* name)
{
    if (!j.contains(name) || !j.at(name).is_string())
        throw std::invalid_argument(std::string("missing string field '") + name + "'");
    return j.at(name).get<std::string>();
}

Amount field_amount(const Json& j, const char* name)
{
    if (!j.contains(name)) throw std::invalid_argument(std::string("missing field '") + name + "'");
    return j.at(name).get<Amount>();
}

MisuseEvent event_from_json(const Json& j)
{
    MisuseEvent e;
    const auto type = field_string(j, "type");
    const auto legality = j.value("legality", std::string("legal"));
    if (legality == "illegal")
        e.legality = Legality::illegal;
    else if (legality != "legal")
        throw std::invalid_argument("legality must be 'legal' or 'illegal'");

    if (type == "CoA") {
        e.body = CoA{field_string(j, "actor"), field_string(j, "key")};
    } else if (type == "SCC") {
        e.body = SCC{field_string(j, "actor"), field_string(j, "key"), field_string(j, "dest"), field_amount(j, "amount")};
    } else if (type == "DoA") {
        const auto mode = j.value("mode", std::string("indefinite"));
        if (mode != "temporary" && mode != "indefinite") throw std::invalid_argument("DoA mode must be temporary or indefinite");
        e.body = DoA{field_string(j, "actor"), field_string(j, "victim"), field_string(j, "key"),
                     mode == "temporary" ? BlockMode::temporary : BlockMode::indefinite};
    } else if (type == "Restore") {
        e.body = Restore{field_string(j, "victim"), field_string(j, "key")};
    } else if (type == "ML") {
        e.body = ML{field_string(j, "actor"), field_string(j, "observer"), field_string(j, "purported"),
                    field_string(j, "key")};
    } else if (type == "MU") {
        e.body = MU{field_string(j, "actor"), field_string(j, "observer"), field_string(j, "key")};
    } else if (type == "ContaminatingDonation") {
        e.body = ContaminatingDonation{field_string(j, "actor"), field_string(j, "key"), field_amount(j, "amount")};
    } else if (type == "ContaminatingExtortion") {
        e.body = ContaminatingExtortion{field_string(j, "actor"), field_string(j, "key"),
                                        j.contains("amount") ? field_amount(j, "amount") : Amount{}};
    } else if (type == "Announce") {
        e.body = Announce{field_string(j, "agent"), field_string(j, "key")};
    } else if (type == "DenyLink") {
        e.body = DenyLink{field_string(j, "agent"), field_string(j, "key")};
    } else if (type == "StoreBackup") {
        e.body = StoreBackup{field_string(j, "agent"), field_string(j, "key")};
    } else if (type == "Safeguard") {
        e.body = Safeguard{field_string(j, "agent"), field_string(j, "key")};
    } else if (type == "Remediate") {
        if (!j.contains("event") || !j.at("event").is_number_unsigned())
            throw std::invalid_argument("missing event index");
        e.body = Remediate{field_string(j, "agent"), j.at("event").get<std::size_t>()};
    } else {
        throw std::invalid_argument("unknown event type '" + type + "'");
    }
    return e;
}

} // namespace

Json event_to_json(const MisuseEvent& e)
{
    Json j = std::visit(
        overloaded{
            [](const CoA& v) { return Json{{"type", "CoA"}, {"actor", v.actor}, {"key", v.key}}; },
            [](const SCC& v) {
                return Json{{"type", "SCC"}, {"actor", v.actor}, {"key", v.key}, {"dest", v.dest}, {"amount", v.amount}};
            },
            [](const DoA& v) {
                return Json{{"type", "DoA"},
                            {"actor", v.actor},
                            {"victim", v.victim},
                            {"key", v.key},
                            {"mode", v.mode == BlockMode::temporary ? "temporary" : "indefinite"}};
            },
            [](const Restore& v) { return Json{{"type", "Restore"}, {"victim", v.victim}, {"key", v.key}}; },
            [](const ML& v) {
                return Json{{"type", "ML"}, {"actor", v.actor}, {"observer", v.observer}, {"purported", v.purported},
                            {"key", v.key}};
            },
            [](const MU& v) { return Json{{"type", "MU"}, {"actor", v.actor}, {"observer", v.observer}, {"key", v.key}}; },
            [](const ContaminatingDonation& v) {
                return Json{{"type", "ContaminatingDonation"}, {"actor", v.actor}, {"key", v.key}, {"amount", v.amount}};
            },
            [](const ContaminatingExtortion& v) {
                return Json{{"type", "ContaminatingExtortion"}, {"actor", v.actor}, {"key", v.key}, {"amount", v.amount}};
            },
            [](const Announce& v) { return Json{{"type", "Announce"}, {"agent", v.agent}, {"key", v.key}}; },
            [](const DenyLink& v) { return Json{{"type", "DenyLink"}, {"agent", v.agent}, {"key", v.key}}; },
            [](const StoreBackup& v) { return Json{{"type", "StoreBackup"}, {"agent", v.agent}, {"key", v.key}}; },
            [](const Safeguard& v) { return Json{{"type", "Safeguard"}, {"agent", v.agent}, {"key", v.key}}; },
            [](const Remediate& v) { return Json{{"type", "Remediate"}, {"agent", v.agent}, {"event", v.event}}; },
        },
        e.body);
    j["legality"] = std::string(to_string(e.legality));
    return j;
}

Scenario parse_scenario(const Json& j)
{
    Scenario s;
    if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
    s.mode = mode_from_string(j.value("mode", std::string("exim")));
    if (!j.contains("agents") || !j.at("agents").is_array()) throw std::invalid_argument("agents: expected an array");
    for (const auto& a : j.at("agents")) s.agents.push_back(a.get<std::string>());
    if (!j.contains("keys") || !j.at("keys").is_array()) throw std::invalid_argument("keys: expected an array");
    for (std::size_t i = 0; i < j.at("keys").size(); ++i) {
        const auto& k = j.at("keys")[i];
        try {
            KeySetup ks;
            ks.id = field_string(k, "id");
            if (k.contains("owner") && !k.at("owner").is_null()) ks.owner = k.at("owner").get<std::string>();
            if (k.contains("balance")) ks.balance = k.at("balance").get<Amount>();
            ks.announced = k.value("announced", false);
            s.keys.push_back(ks);
        } catch (const std::exception& ex) {
            throw std::invalid_argument("keys[" + std::to_string(i) + "]: " + ex.what());
        }
    }
    if (!j.contains("events") || !j.at("events").is_array()) throw std::invalid_argument("events: expected an array");
    for (std::size_t i = 0; i < j.at("events").size(); ++i) {
        try {
            s.events.push_back(event_from_json(j.at("events")[i]));
        } catch (const std::exception& ex) {
            throw std::invalid_argument("events[" + std::to_string(i) + "]: " + ex.what());
        }
    }
    return s;
}

Json run_scenario(const Scenario& s)
{
    const CustodyWorld initial(s.agents, s.keys);
    CustodyWorld world = initial;
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        try {
            world.apply(s.events[i]);
        } catch (const std::exception& ex) {
            throw InvalidSequence(i, ex.what());
        }
    }
    Json labels = Json::array();
    for (const auto& c : classify_history(world.history(), s.mode))
        labels.push_back({{"label", std::string(to_string(c.label))}, {"events", c.events}});
    Json policy = Json::array();
    for (const auto& k : s.keys)
        if (k.owner)
            policy.push_back({{"agent", *k.owner}, {"key", k.id}, {"violations", check_defensive_policy(world, *k.owner, k.id)}});
    Json events = Json::array();
    for (const auto& e : s.events) events.push_back(event_to_json(e));
    return {{"mode", std::string(to_string(s.mode))},
            {"events", events},
            {"labels", labels},
            {"policy", policy},
            {"world", world.to_json()}};
}

} // namespace nlab::misuse
