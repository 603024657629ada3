#include "ralign/error.hpp"

namespace ralign {

int exit_code(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::Input: return 2;
        case ErrorCategory::DataContract: return 3;
        case ErrorCategory::Parameter: return 4;
    }
    return 1;
}

}  // namespace ralign
