#include "probmotion/error.hpp"

namespace probmotion {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::shape: return "shape error";
        case Errc::numeric: return "numeric error";
        case Errc::data: return "data error";
        case Errc::io: return "io error";
        case Errc::format: return "format error";
        case Errc::config: return "config error";
    }
    return "error";
}

}  // namespace probmotion
