#pragma once

#include <stdexcept>
#include <string>

namespace fogswitch {

// every failure carries a stable machine-readable code (used verbatim on the
// wire as {"error":"<code>"}) plus a human message
struct fog_error : std::runtime_error {
    fog_error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

  private:
    std::string code_;
};

// upstream HTTP failure; keeps the status and raw body for pass-through
struct upstream_error : fog_error {
    upstream_error(const std::string& instance_id, int status, std::string body)
        : fog_error("UpstreamError",
                    "instance " + instance_id + " returned status " + std::to_string(status)),
          instance_id(instance_id), status(status), body(std::move(body)) {}
    std::string instance_id;
    int status;
    std::string body;
};

namespace errc {
inline constexpr const char* empty_dataset = "EmptyDataset";
inline constexpr const char* ragged_dataset = "RaggedDataset";
inline constexpr const char* non_positive_param = "NonPositiveParam";
inline constexpr const char* malformed_row = "MalformedRow";
inline constexpr const char* k_too_large = "KTooLarge";
inline constexpr const char* non_finite_point = "NonFinitePoint";
inline constexpr const char* bind_failure = "BindFailure";
inline constexpr const char* unknown_instance = "UnknownInstance";
inline constexpr const char* instance_unreachable = "InstanceUnreachable";
inline constexpr const char* empty_training_set = "EmptyTrainingSet";
inline constexpr const char* non_finite_loss = "NonFiniteLoss";
inline constexpr const char* malformed_model = "MalformedModel";
inline constexpr const char* io_failure = "IoFailure";
inline constexpr const char* schema_mismatch = "SchemaMismatch";
inline constexpr const char* missing_instance_data = "MissingInstanceData";
inline constexpr const char* timeout = "Timeout";
inline constexpr const char* connection_refused = "ConnectionRefused";
inline constexpr const char* model_load_failure = "ModelLoadFailure";
inline constexpr const char* empty_matrix = "EmptyMatrix";
inline constexpr const char* missing_tier = "MissingTier";
inline constexpr const char* config_error = "ConfigError";
}  // namespace errc

}  // namespace fogswitch
