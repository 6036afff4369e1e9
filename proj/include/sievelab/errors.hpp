#pragma once

#include <stdexcept>
#include <string>

namespace sievelab {

// Base for all typed failures raised by the library. Callers that want to
// distinguish cases catch the concrete type; everything derives from
// std::runtime_error so generic handlers keep working.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SIEVELAB_ERROR(NAME)                        \
    struct NAME : Error {                           \
        using Error::Error;                         \
    }

SIEVELAB_ERROR(DomainError);
SIEVELAB_ERROR(NonIntegrable);
SIEVELAB_ERROR(CascadeStall);
SIEVELAB_ERROR(GridMismatch);
SIEVELAB_ERROR(GridTooShort);
SIEVELAB_ERROR(NonCommensurableGrid);
SIEVELAB_ERROR(OverflowRisk);
SIEVELAB_ERROR(RangeEmpty);
SIEVELAB_ERROR(EnvelopeDiverges);
SIEVELAB_ERROR(HypothesisUnmet);
SIEVELAB_ERROR(GammaNonpositive);
SIEVELAB_ERROR(PathExplosion);
SIEVELAB_ERROR(BudgetExceeded);
SIEVELAB_ERROR(HorizonTooShort);
SIEVELAB_ERROR(ConfigInvalid);
SIEVELAB_ERROR(IoError);

#undef SIEVELAB_ERROR

}  // namespace sievelab
