#include "qwalk/qwalk.h"

#include "qwalk/config.hpp"
#include "qwalk/error.hpp"
#include "qwalk/io.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <string>

struct qw_state {
    qwalk::GridState value;
};

struct qw_config {
    qwalk::RunConfig value;
};

namespace {

thread_local std::string last_error;

qw_status to_status(qwalk::ErrorCode code) {
    switch (code) {
    case qwalk::ErrorCode::invalid_argument: return QW_INVALID_ARGUMENT;
    case qwalk::ErrorCode::config: return QW_CONFIG_ERROR;
    case qwalk::ErrorCode::non_convergence: return QW_NON_CONVERGENCE;
    case qwalk::ErrorCode::regime_violation: return QW_REGIME_VIOLATION;
    case qwalk::ErrorCode::io: return QW_IO_ERROR;
    }
    return QW_INTERNAL_ERROR;
}

template <class F>
qw_status guarded(F&& f) {
    try {
        last_error.clear();
        f();
        return QW_OK;
    } catch (const qwalk::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception& e) {
        last_error = e.what();
        return QW_CONFIG_ERROR;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return QW_INTERNAL_ERROR;
    } catch (const std::exception& e) {
        last_error = e.what();
        return QW_INTERNAL_ERROR;
    } catch (...) {
        last_error = "unknown exception";
        return QW_INTERNAL_ERROR;
    }
}

void require(const void* p, const char* what) {
    if (!p)
        qwalk::fail(qwalk::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

} // namespace

extern "C" {

const char* qw_version(void) { return "0.1.0"; }

const char* qw_status_name(qw_status status) {
    switch (status) {
    case QW_OK: return "ok";
    case QW_INVALID_ARGUMENT: return "invalid_argument";
    case QW_CONFIG_ERROR: return "config_error";
    case QW_NON_CONVERGENCE: return "non_convergence";
    case QW_REGIME_VIOLATION: return "regime_violation";
    case QW_IO_ERROR: return "io_error";
    case QW_INTERNAL_ERROR: return "internal_error";
    }
    return "unknown";
}

const char* qw_last_error(void) { return last_error.c_str(); }

qw_status qw_state_delta(int component, int64_t site, double re, double im, qw_state** out) {
    return guarded([&] {
        require(out, "out");
        *out = new qw_state{qwalk::GridState::delta(component, site, {re, im})};
    });
}

qw_status qw_state_from_json(const char* json, qw_state** out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        const auto j = nlohmann::ordered_json::parse(json, nullptr, false);
        if (j.is_discarded())
            qwalk::fail(qwalk::ErrorCode::config, "state text is not valid JSON");
        *out = new qw_state{qwalk::state_from_json(j)};
    });
}

qw_status qw_state_to_json(const qw_state* state, char** out) {
    return guarded([&] {
        require(state, "state");
        require(out, "out");
        const std::string s = qwalk::state_to_json(state->value).dump();
        char* buf = new char[s.size() + 1];
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *out = buf;
    });
}

qw_status qw_state_norm(const qw_state* state, const char* kind, double* out) {
    return guarded([&] {
        require(state, "state");
        require(kind, "kind");
        require(out, "out");
        *out = qwalk::norm(state->value, qwalk::NormKind::parse(kind));
    });
}

qw_status qw_state_support(const qw_state* state, int64_t* lo, int64_t* hi) {
    return guarded([&] {
        require(state, "state");
        require(lo, "lo");
        require(hi, "hi");
        *lo = state->value.empty() ? 0 : state->value.lo();
        *hi = state->value.empty() ? -1 : state->value.hi();
    });
}

void qw_state_free(qw_state* state) { delete state; }
void qw_string_free(char* s) { delete[] s; }

qw_status qw_config_load(const char* path, qw_config** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new qw_config{qwalk::load_config(path)};
    });
}

qw_status qw_config_parse(const char* text, const char* base_dir, qw_config** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new qw_config{qwalk::parse_config(text, base_dir ? base_dir : "")};
    });
}

qw_status qw_config_set_seed(qw_config* config, uint64_t seed) {
    return guarded([&] {
        require(config, "config");
        config->value.seed_override = seed;
    });
}

qw_status qw_config_initial_state(const qw_config* config, qw_state** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = new qw_state{qwalk::build_initial_state(config->value)};
    });
}

void qw_config_free(qw_config* config) { delete config; }

qw_status qw_walk(const qw_config* config, const qw_state* initial, int64_t horizon, qw_state** out) {
    return guarded([&] {
        require(config, "config");
        require(initial, "initial");
        require(out, "out");
        const auto wc = qwalk::walk_config(config->value, horizon);
        *out = new qw_state{qwalk::nonlinear_power(initial->value, wc, horizon)};
    });
}

qw_status qw_run(const qw_config* config, const char* command, const char* out_dir, unsigned threads) {
    return guarded([&] {
        require(config, "config");
        require(command, "command");
        require(out_dir, "out_dir");
        qwalk::run_command(config->value, command, out_dir, threads);
    });
}

} // extern "C"
