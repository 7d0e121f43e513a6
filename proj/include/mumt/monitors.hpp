#pragma once

// Trace recorder and post-hoc runtime-monitor engine (hazards H1-H6 and the
// requirement catalog).
//
// Trace file: line-delimited JSON. Line 1 is the header
//   {"format":"mumt-trace/1","seed":..,"config_hash":..,"frames":N,"channels":[..],"context":{..},"scenario":{..}}
// and every further line one record {"f":frame,"t":time,"ch":channel,"payload":{..},"status":{..}}.

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mumt/core.hpp"
#include "mumt/serialize.hpp"

namespace mumt::monitors {

inline constexpr const char* kTraceFormat = "mumt-trace/1";

/// Every channel the scheduler writes each frame.
const std::vector<std::string>& channel_ids();

struct TraceRecord {
    FrameStamp frame;
    std::string channel;
    json payload;
    json component_statuses = json::object();
};

struct Trace {
    json header = json::object();
    std::vector<TraceRecord> records;

    std::int64_t frames() const { return header.value("frames", std::int64_t{0}); }
    void write(std::ostream& os) const;
    static Trace read(std::istream& is);  // throws ConfigError on malformed input
};

std::string record_line(const TraceRecord& r);

// ---------------------------------------------------------------------------
// Recorder (on-board database)

enum class Ack { ok, recording_fault };

struct RecorderFault {
    std::string channel;
    std::int64_t from = 0;
    std::int64_t to = 0;   // inclusive
    bool total = false;    // backup path fails too
};

struct RecordResult {
    Ack ack = Ack::ok;
    bool stored = true;
    bool detected = false;  // fault noticed (alert owed this frame)
};

class Recorder {
public:
    explicit Recorder(json header);

    void add_fault(RecorderFault f) { faults_.push_back(std::move(f)); }
    /// Channels whose writes are read back and retried on the backup path.
    void set_checked(std::set<std::string> channels) { checked_ = std::move(channels); }

    /// Throws std::logic_error on a frame earlier than the previous record.
    RecordResult record(TraceRecord rec);

    const Trace& trace() const { return trace_; }
    Trace take() { return std::move(trace_); }

private:
    Trace trace_;
    std::vector<RecorderFault> faults_;
    std::set<std::string> checked_;
    std::int64_t last_frame_ = -1;
};

// ---------------------------------------------------------------------------
// Monitor specs and catalog

enum class Kind { instantaneous, bounded_response, absence, completeness };
enum class Severity { hazard, requirement };
enum class Enforcement { monitored, design_time, out_of_scope };

std::string kind_name(Kind k);
std::string severity_name(Severity s);
std::string enforcement_name(Enforcement e);

/// Per-frame view handed to predicates.
class TraceIndex;
struct FrameView {
    const TraceIndex* index = nullptr;
    std::int64_t frame = 0;
    const json* context = nullptr;

    const json* ch(const std::string& channel) const;            // this frame
    const json* ch_at(const std::string& channel, std::int64_t f) const;
    const json& ctx() const { return *context; }
    const SafetyConstraintSet& constraints() const;
};

using PredicateFn = std::function<bool(const FrameView&, const std::string& arg)>;

struct Predicate {
    std::string text;  // as written in the catalog
    PredicateFn fn;
    std::string arg;
    bool negate = false;
    bool operator()(const FrameView& v) const { return fn(v, arg) != negate; }
};

/// Parses "name", "name:arg" or "!name[:arg]"; unknown names throw ConfigError.
Predicate compile_predicate(const std::string& text);
void register_predicate(const std::string& name, PredicateFn fn);
std::vector<std::string> predicate_names();

struct MonitorSpec {
    std::string id;
    Kind kind = Kind::instantaneous;
    Severity severity = Severity::requirement;
    std::optional<Predicate> when;      // guard (instantaneous, absence)
    std::optional<Predicate> pred;      // instantaneous: must hold; absence: must never hold
    std::optional<Predicate> trigger;   // bounded_response
    std::optional<Predicate> response;
    std::string deadline_expr = "0";    // integer, or "<context key>[+-]<int>"
    std::vector<std::string> channels;  // completeness

    std::int64_t deadline(const json& context) const;
};

struct CatalogEntry {
    std::string id;
    Enforcement enforcement = Enforcement::monitored;
    std::optional<MonitorSpec> spec;  // monitored rows only
    std::string note;
};

struct Catalog {
    std::vector<CatalogEntry> entries;

    const CatalogEntry* find(const std::string& id) const;
    std::vector<MonitorSpec> monitors() const;
    static Catalog parse(std::istream& is);  // throws ConfigError with line numbers
    static Catalog load(const std::string& path);
};

/// Path of the shipped catalog.
std::string default_catalog_path();

// ---------------------------------------------------------------------------
// Evaluation

struct Violation {
    std::int64_t frame = 0;
    std::string detail;
};

struct MonitorVerdict {
    std::string id;
    Severity severity = Severity::requirement;
    std::vector<Violation> violations;
    bool pass() const { return violations.empty(); }
};

/// Frame x channel lookup built once per trace.
class TraceIndex {
public:
    explicit TraceIndex(const Trace& t);
    const json* get(std::size_t channel_slot, std::int64_t frame) const;
    const json* get(const std::string& channel, std::int64_t frame) const;
    std::size_t count(const std::string& channel, std::int64_t frame) const;
    std::int64_t frames() const { return frames_; }
    const json& context() const { return context_; }
    /// Constraint set decoded from the header context (defaults where absent).
    const SafetyConstraintSet& constraints() const { return constraints_; }

private:
    std::int64_t frames_ = 0;
    json context_;
    SafetyConstraintSet constraints_;
    std::map<std::string, std::size_t> slots_;
    std::vector<std::vector<const json*>> cells_;  // slot -> frame
    std::vector<std::vector<std::uint8_t>> counts_;
};

MonitorVerdict evaluate_one(const TraceIndex& idx, const MonitorSpec& spec);
std::vector<MonitorVerdict> evaluate(const Trace& trace, const std::vector<MonitorSpec>& specs);

json verdicts_to_json(const std::vector<MonitorVerdict>& v);

/// Text table: requirement id, class, verdict (when verdicts are given).
std::string traceability_report(const Catalog& catalog, const std::map<std::string, std::string>& verdicts = {});

}  // namespace mumt::monitors
