#include "mumt/monitors.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

namespace mumt::monitors {

const std::vector<std::string>& channel_ids() {
    static const std::vector<std::string> ids{"L1.5", "W1", "W2", "W3", "W4", "W5", "W6", "W7",
                                              "W8",   "W9", "W13", "W14", "TRUTH", "REC"};
    return ids;
}

std::string record_line(const TraceRecord& r) {
    json j{{"f", r.frame.frame_index}, {"t", r.frame.sim_time}, {"ch", r.channel}, {"payload", r.payload},
           {"status", r.component_statuses}};
    return j.dump();
}

void Trace::write(std::ostream& os) const {
    os << header.dump() << '\n';
    for (const auto& r : records) os << record_line(r) << '\n';
}

Trace Trace::read(std::istream& is) {
    Trace t;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError("trace line " + std::to_string(n) + ": " + e.what());
        }
        if (n == 1) {
            if (j.value("format", "") != kTraceFormat) throw ConfigError("trace header missing format " +
                                                                         std::string(kTraceFormat));
            t.header = std::move(j);
            continue;
        }
        try {
            TraceRecord r;
            r.frame = {j.at("f").get<std::int64_t>(), j.at("t").get<double>()};
            r.channel = j.at("ch").get<std::string>();
            r.payload = std::move(j.at("payload"));
            r.component_statuses = j.value("status", json::object());
            t.records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ConfigError("trace line " + std::to_string(n) + ": " + e.what());
        }
    }
    if (n == 0) throw ConfigError("empty trace");
    return t;
}

// ---------------------------------------------------------------------------

Recorder::Recorder(json header) { trace_.header = std::move(header); }

RecordResult Recorder::record(TraceRecord rec) {
    if (rec.frame.frame_index < last_frame_)
        throw std::logic_error("recorder: frame " + std::to_string(rec.frame.frame_index) + " after " +
                               std::to_string(last_frame_));
    last_frame_ = rec.frame.frame_index;
    RecordResult res;
    const RecorderFault* fault = nullptr;
    for (const auto& f : faults_)
        if (f.channel == rec.channel && rec.frame.frame_index >= f.from && rec.frame.frame_index <= f.to) fault = &f;
    if (fault) {
        res.ack = Ack::recording_fault;
        if (checked_.count(rec.channel)) {
            // Read-back caught the failed write; retry on the backup path.
            res.detected = true;
            res.stored = !fault->total;
        } else {
            res.stored = false;
        }
    }
    if (res.stored) trace_.records.push_back(std::move(rec));
    return res;
}

// ---------------------------------------------------------------------------

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::instantaneous: return "instantaneous";
        case Kind::bounded_response: return "bounded_response";
        case Kind::absence: return "absence";
        case Kind::completeness: return "completeness";
    }
    return "?";
}

std::string severity_name(Severity s) { return s == Severity::hazard ? "hazard" : "requirement"; }

std::string enforcement_name(Enforcement e) {
    switch (e) {
        case Enforcement::monitored: return "monitored";
        case Enforcement::design_time: return "design-time";
        case Enforcement::out_of_scope: return "out-of-scope";
    }
    return "?";
}

namespace {

std::map<std::string, PredicateFn>& registry() {
    static std::map<std::string, PredicateFn> r;
    return r;
}
std::mutex registry_mutex;

}  // namespace

void install_builtin_predicates();  // predicates.cpp

void register_predicate(const std::string& name, PredicateFn fn) {
    std::lock_guard lock(registry_mutex);
    registry()[name] = std::move(fn);
}

static const std::map<std::string, PredicateFn>& predicates() {
    static std::once_flag once;
    std::call_once(once, install_builtin_predicates);
    return registry();
}

std::vector<std::string> predicate_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : predicates()) out.push_back(k);
    return out;
}

Predicate compile_predicate(const std::string& text) {
    Predicate p;
    p.text = text;
    std::string body = text;
    if (!body.empty() && body[0] == '!') {
        p.negate = true;
        body.erase(0, 1);
    }
    const auto colon = body.find(':');
    const std::string name = body.substr(0, colon);
    if (colon != std::string::npos) p.arg = body.substr(colon + 1);
    const auto& reg = predicates();
    std::lock_guard lock(registry_mutex);
    const auto it = reg.find(name);
    if (it == reg.end()) throw ConfigError("unknown predicate '" + name + "'");
    p.fn = it->second;
    return p;
}

std::int64_t MonitorSpec::deadline(const json& context) const {
    const auto& e = deadline_expr;
    std::size_t pos = e.find_first_of("+-", 1);
    const std::string head = e.substr(0, pos);
    std::int64_t base = 0;
    if (!head.empty() && (std::isdigit(static_cast<unsigned char>(head[0])) != 0)) {
        base = std::stoll(head);
    } else {
        if (!context.contains(head) || !context[head].is_number_integer())
            throw ConfigError("deadline refers to unknown context key '" + head + "'");
        base = context[head].get<std::int64_t>();
    }
    if (pos != std::string::npos) {
        const std::int64_t off = std::stoll(e.substr(pos + 1));
        base += e[pos] == '+' ? off : -off;
    }
    if (base < 0) throw ConfigError("deadline for " + id + " is negative");
    return base;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (!quoted && (c == ' ' || c == '\t')) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ConfigError("unterminated quote");
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

const CatalogEntry* Catalog::find(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return &e;
    return nullptr;
}

std::vector<MonitorSpec> Catalog::monitors() const {
    std::vector<MonitorSpec> out;
    for (const auto& e : entries)
        if (e.spec) out.push_back(*e.spec);
    return out;
}

Catalog Catalog::parse(std::istream& is) {
    Catalog cat;
    std::set<std::string> seen;
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        try {
            const auto tok = tokenize(line);
            if (tok.empty()) continue;
            CatalogEntry e;
            e.id = tok[0];
            if (!seen.insert(e.id).second) throw ConfigError("duplicate id " + e.id);
            std::map<std::string, std::string> kv;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                const auto eq = tok[i].find('=');
                if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + tok[i] + "'");
                kv[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
            }
            const std::string cls = kv.count("class") ? kv["class"] : "";
            if (cls == "monitored") e.enforcement = Enforcement::monitored;
            else if (cls == "design-time") e.enforcement = Enforcement::design_time;
            else if (cls == "out-of-scope") e.enforcement = Enforcement::out_of_scope;
            else throw ConfigError("unknown class '" + cls + "' for " + e.id);
            e.note = kv.count("note") ? kv["note"] : "";
            if (e.enforcement == Enforcement::monitored) {
                MonitorSpec s;
                s.id = e.id;
                const std::string kind = kv["kind"];
                if (kind == "instantaneous") s.kind = Kind::instantaneous;
                else if (kind == "bounded_response") s.kind = Kind::bounded_response;
                else if (kind == "absence") s.kind = Kind::absence;
                else if (kind == "completeness") s.kind = Kind::completeness;
                else throw ConfigError("unknown monitor kind '" + kind + "' for " + e.id);
                const std::string sev = kv.count("severity") ? kv["severity"] : "requirement";
                if (sev == "hazard") s.severity = Severity::hazard;
                else if (sev == "requirement") s.severity = Severity::requirement;
                else throw ConfigError("unknown severity '" + sev + "' for " + e.id);
                auto need = [&](const char* key) -> const std::string& {
                    if (!kv.count(key)) throw ConfigError(e.id + ": " + kind + " needs " + key);
                    return kv[key];
                };
                if (kv.count("when")) s.when = compile_predicate(kv["when"]);
                switch (s.kind) {
                    case Kind::instantaneous:
                    case Kind::absence: s.pred = compile_predicate(need("pred")); break;
                    case Kind::bounded_response:
                        s.trigger = compile_predicate(need("trigger"));
                        s.response = compile_predicate(need("response"));
                        s.deadline_expr = kv.count("deadline") ? kv["deadline"] : "0";
                        s.deadline(json{{"reaction_delay_frames", 0},
                                        {"los_max_loss_frames", 0},
                                        {"distraction_limit_frames", 0},
                                        {"jetwash_takeover_frames", 0},
                                        {"lead_unknown_frames", 0}});
                        break;
                    case Kind::completeness:
                        s.channels = need("channels") == "all" ? channel_ids() : split(kv["channels"], ',');
                        break;
                }
                e.spec = std::move(s);
            }
            cat.entries.push_back(std::move(e));
        } catch (const ConfigError& err) {
            throw ConfigError("catalog line " + std::to_string(n) + ": " + err.what());
        }
    }
    return cat;
}

Catalog Catalog::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open catalog " + path);
    return parse(f);
}

std::string default_catalog_path() { return std::string(MUMT_DATA_DIR) + "/catalog.mon"; }

// ---------------------------------------------------------------------------
// Evaluation

TraceIndex::TraceIndex(const Trace& t) {
    frames_ = t.frames();
    for (const auto& r : t.records) frames_ = std::max(frames_, r.frame.frame_index + 1);
    context_ = t.header.value("context", json::object());
    if (context_.contains("d_min")) constraints_.separation.d_min = context_["d_min"].get<double>();
    if (context_.contains("geofence")) constraints_.geofence = fence_from_json(context_["geofence"]);
    if (context_.contains("envelope")) constraints_.epm_envelope = context_["envelope"].get<EnvelopeLimits>();
    const auto& ids = channel_ids();
    for (std::size_t i = 0; i < ids.size(); ++i) slots_[ids[i]] = i;
    for (const auto& r : t.records)
        if (!slots_.count(r.channel)) slots_.emplace(r.channel, slots_.size());
    cells_.assign(slots_.size(), std::vector<const json*>(static_cast<std::size_t>(frames_), nullptr));
    counts_.assign(slots_.size(), std::vector<std::uint8_t>(static_cast<std::size_t>(frames_), 0));
    for (const auto& r : t.records) {
        if (r.frame.frame_index < 0) continue;
        const auto s = slots_[r.channel];
        const auto f = static_cast<std::size_t>(r.frame.frame_index);
        if (!cells_[s][f]) cells_[s][f] = &r.payload;
        if (counts_[s][f] < 255) ++counts_[s][f];
    }
}

const json* TraceIndex::get(std::size_t slot, std::int64_t frame) const {
    if (slot >= cells_.size() || frame < 0 || frame >= frames_) return nullptr;
    return cells_[slot][static_cast<std::size_t>(frame)];
}

const json* TraceIndex::get(const std::string& channel, std::int64_t frame) const {
    const auto it = slots_.find(channel);
    return it == slots_.end() ? nullptr : get(it->second, frame);
}

std::size_t TraceIndex::count(const std::string& channel, std::int64_t frame) const {
    const auto it = slots_.find(channel);
    if (it == slots_.end() || frame < 0 || frame >= frames_) return 0;
    return counts_[it->second][static_cast<std::size_t>(frame)];
}

const json* FrameView::ch(const std::string& channel) const { return index->get(channel, frame); }
const json* FrameView::ch_at(const std::string& channel, std::int64_t f) const { return index->get(channel, f); }
const SafetyConstraintSet& FrameView::constraints() const { return index->constraints(); }

MonitorVerdict evaluate_one(const TraceIndex& idx, const MonitorSpec& spec) {
    MonitorVerdict v;
    v.id = spec.id;
    v.severity = spec.severity;
    const std::int64_t n = idx.frames();
    FrameView view{&idx, 0, &idx.context()};
    auto at = [&](const Predicate& p, std::int64_t f) {
        view.frame = f;
        return p(view);
    };
    switch (spec.kind) {
        case Kind::instantaneous:
            for (std::int64_t f = 0; f < n; ++f)
                if ((!spec.when || at(*spec.when, f)) && !at(*spec.pred, f))
                    v.violations.push_back({f, spec.pred->text + " false"});
            break;
        case Kind::absence:
            for (std::int64_t f = 0; f < n; ++f)
                if ((!spec.when || at(*spec.when, f)) && at(*spec.pred, f))
                    v.violations.push_back({f, spec.pred->text + " occurred"});
            break;
        case Kind::bounded_response: {
            const std::int64_t d = spec.deadline(idx.context());
            // next_ok[f]: first frame >= f where the response holds.
            std::vector<std::int64_t> next_ok(static_cast<std::size_t>(n) + 1, n);
            for (std::int64_t f = n - 1; f >= 0; --f)
                next_ok[static_cast<std::size_t>(f)] =
                    at(*spec.response, f) ? f : next_ok[static_cast<std::size_t>(f) + 1];
            for (std::int64_t f = 0; f < n; ++f) {
                if (!at(*spec.trigger, f)) continue;
                if (f + d >= n) continue;  // window runs past the end of the trace
                if (next_ok[static_cast<std::size_t>(f)] > f + d)
                    v.violations.push_back({f, spec.trigger->text + " without " + spec.response->text + " within " +
                                                   std::to_string(d)});
            }
            break;
        }
        case Kind::completeness:
            for (std::int64_t f = 0; f < n; ++f)
                for (const auto& c : spec.channels) {
                    const auto k = idx.count(c, f);
                    if (k != 1) v.violations.push_back({f, c + (k == 0 ? " missing" : " duplicated")});
                }
            break;
    }
    return v;
}

std::vector<MonitorVerdict> evaluate(const Trace& trace, const std::vector<MonitorSpec>& specs) {
    const TraceIndex idx(trace);
    std::vector<MonitorVerdict> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(evaluate_one(idx, s));
    return out;
}

json verdicts_to_json(const std::vector<MonitorVerdict>& vs) {
    json out = json::array();
    for (const auto& v : vs) {
        json viol = json::array();
        for (std::size_t i = 0; i < v.violations.size() && i < 20; ++i)
            viol.push_back({{"frame", v.violations[i].frame}, {"detail", v.violations[i].detail}});
        out.push_back({{"id", v.id},
                       {"severity", severity_name(v.severity)},
                       {"pass", v.pass()},
                       {"violation_count", v.violations.size()},
                       {"first_violations", viol}});
    }
    return out;
}

std::string traceability_report(const Catalog& cat, const std::map<std::string, std::string>& verdicts) {
    std::ostringstream os;
    os << std::left << std::setw(12) << "id" << std::setw(14) << "class" << std::setw(18) << "kind" << std::setw(13)
       << "severity" << std::setw(12) << "verdict"
       << "note\n";
    for (const auto& e : cat.entries) {
        const auto it = verdicts.find(e.id);
        std::string verdict = e.spec ? "-" : "n/a";
        if (it != verdicts.end()) verdict = it->second;
        os << std::setw(12) << e.id << std::setw(14) << enforcement_name(e.enforcement) << std::setw(18)
           << (e.spec ? kind_name(e.spec->kind) : "-") << std::setw(13)
           << (e.spec ? severity_name(e.spec->severity) : "-") << std::setw(12) << verdict << e.note << '\n';
    }
    return os.str();
}

}  // namespace mumt::monitors
