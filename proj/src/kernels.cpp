#include "probmotion/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "probmotion/error.hpp"

namespace probmotion::kernels {
namespace {

Lane detect_lane() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) return Lane::avx2;
#endif
#if defined(__aarch64__)
    return Lane::neon;  // NEON is mandatory on aarch64
#endif
    return Lane::scalar;
}

Lane pick_lane() {
    const char* env = std::getenv("PROBMOTION_KERNELS");
    if (env != nullptr && *env != '\0' && std::strcmp(env, "auto") != 0) {
        Lane want = Lane::scalar;
        bool known = true;
        if (std::strcmp(env, "scalar") == 0) want = Lane::scalar;
        else if (std::strcmp(env, "avx2") == 0) want = Lane::avx2;
        else if (std::strcmp(env, "neon") == 0) want = Lane::neon;
        else known = false;
        if (known && lane_available(want)) return want;
        std::fprintf(stderr,
                     "warning: PROBMOTION_KERNELS=%s is %s; using auto-detection\n",
                     env, known ? "not available on this machine" : "not a known lane");
    }
    return detect_lane();
}

// Lane is resolved once on first use; force_lane/reset_lane exist for tests.
Lane g_lane = Lane::scalar;
bool g_resolved = false;

void resolve() {
    if (!g_resolved) {
        g_lane = pick_lane();
        g_resolved = true;
    }
}

}  // namespace

const char* lane_name(Lane lane) {
    switch (lane) {
        case Lane::scalar: return "scalar";
        case Lane::avx2: return "avx2";
        case Lane::neon: return "neon";
    }
    return "unknown";
}

bool lane_available(Lane lane) {
    switch (lane) {
        case Lane::scalar:
            return true;
        case Lane::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Lane::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Ops& table(Lane lane) {
    if (!lane_available(lane))
        raise(Errc::config, std::string("kernel lane '") + lane_name(lane) +
                                "' is not available on this machine");
    switch (lane) {
        case Lane::scalar: return detail::scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
        case Lane::avx2: return detail::avx2_table();
#endif
#if defined(__aarch64__)
        case Lane::neon: return detail::neon_table();
#endif
        default: return detail::scalar_table();
    }
}

Lane active_lane() {
    resolve();
    return g_lane;
}

const Ops& ops() { return table(active_lane()); }

void force_lane(Lane lane) {
    if (!lane_available(lane))
        raise(Errc::config, std::string("kernel lane '") + lane_name(lane) +
                                "' is not available on this machine");
    g_lane = lane;
    g_resolved = true;
}

void reset_lane() { g_resolved = false; }

}  // namespace probmotion::kernels
