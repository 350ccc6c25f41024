#pragma once

#include "abr/aggregator.hpp"
#include "abr/core.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace abr {

// Decision reason codes shared between policies, logs, and tests.
namespace reason {
inline constexpr const char* rate_select = "rate-select";
inline constexpr const char* latency_high = "latency-high";
inline constexpr const char* hysteresis_hold = "hysteresis-hold";
inline constexpr const char* shift_follow = "shift-follow";
inline constexpr const char* advisor_ok = "advisor-ok";
inline constexpr const char* timeout = "timeout";
inline constexpr const char* invalid_response = "invalid-response";
inline constexpr const char* transport_error = "transport-error";
inline constexpr const char* user_override = "user-override";
inline constexpr const char* override_pinned = "override-pinned";
} // namespace reason

struct RulePolicyConfig {
    BitrateLadder ladder = default_ladder();
    double latency_threshold_ms = 100.0;
    double base_buffer_s = 2.0;
    double buffer_growth_per_100ms = 1.0; // seconds per 100 ms over threshold
    double buffer_min_s = 2.0;
    double buffer_max_s = 10.0;

    void validate() const;
};

// Threshold rules: resolution from the ladder lookup on the window's
// average inbound rate; buffer grows linearly with latency in excess of
// the threshold (clamped to the configured bounds) and sits at the base
// otherwise. Latency moves only the buffer, never the resolution.
Decision rule_decide(const RulePolicyConfig& cfg, const WindowStats& stats);

// Buffer seconds for a given average latency (absent latency = base).
double rule_buffer_seconds(const RulePolicyConfig& cfg,
                           std::optional<double> avg_latency_ms);

struct AdvisorRequest {
    std::optional<double> avg_latency_ms;
    double avg_kbps_in = 0;
    std::string current_resolution_label;
    std::int64_t current_buffer_bytes = 0;
    std::vector<std::string> ladder_labels;
};

struct AdvisorResponse {
    std::string resolution_label;
    std::int64_t buffer_bytes = 0;
};

// Wire encoding: JSON object with fields avg_latency_ms, avg_kbps_in,
// current_resolution, current_buffer_bytes, ladder. Response carries
// resolution and buffer_bytes.
std::string advisor_request_to_json(const AdvisorRequest& req);
AdvisorRequest advisor_request_from_json(const std::string& body);
std::string advisor_response_to_json(const AdvisorResponse& resp);
AdvisorResponse advisor_response_from_json(const std::string& body);

// Transport for one advisor consultation. Returns the raw response body,
// or nullopt tagged with a failure class.
class AdvisorTransport {
public:
    enum class Failure { none, timeout, transport };

    struct Result {
        std::optional<std::string> body;
        Failure failure = Failure::none;
    };

    virtual ~AdvisorTransport() = default;
    virtual Result post(const std::string& json_body, int timeout_ms) = 0;
};

class HttpAdvisorTransport : public AdvisorTransport {
public:
    // url addresses the decide endpoint, e.g. http://127.0.0.1:8099/decide
    explicit HttpAdvisorTransport(const std::string& url);
    ~HttpAdvisorTransport() override;
    Result post(const std::string& json_body, int timeout_ms) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Consults the advisor; on timeout, transport error, or an invalid
// response (label not on the ladder, non-positive buffer, bad JSON) the
// decision falls back to rule_decide on the same inputs, with the failure
// class in the reason. Never throws toward the caller: degrading is the
// error path.
Decision advisor_decide(AdvisorTransport& transport, const AdvisorRequest& req,
                        const RulePolicyConfig& fallback, int timeout_ms,
                        double decided_at_s);

AdvisorRequest build_advisor_request(const WindowStats& stats,
                                     const StreamConfig& current,
                                     const BitrateLadder& ladder);

// Suppresses resolution churn. A transient window keeps the applied rung
// (the buffer target still follows the candidate); a shifted window
// passes the candidate through; a stable window with a different rung
// passes only once the same rung has been proposed for sustain_windows
// consecutive windows. The first candidate ever seen always applies.
class HysteresisFilter {
public:
    explicit HysteresisFilter(int sustain_windows = 2);

    Decision apply(const Decision& candidate, Fluctuation fluct);

    const std::optional<StreamConfig>& current() const { return current_; }

private:
    Decision hold(const Decision& candidate);

    int sustain_windows_;
    std::optional<StreamConfig> current_;
    std::string pending_label_;
    int pending_count_ = 0;
};

} // namespace abr
