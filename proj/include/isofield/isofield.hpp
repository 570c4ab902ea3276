#ifndef ISOFIELD_ISOFIELD_HPP
#define ISOFIELD_ISOFIELD_HPP

#include "isofield/coefficients.hpp"
#include "isofield/diagnostics.hpp"
#include "isofield/ensemble.hpp"
#include "isofield/io.hpp"
#include "isofield/ks.hpp"
#include "isofield/legendre.hpp"
#include "isofield/parallel.hpp"
#include "isofield/quadrature.hpp"
#include "isofield/random.hpp"
#include "isofield/report.hpp"
#include "isofield/sampling.hpp"
#include "isofield/transform.hpp"
#include "isofield/wigner.hpp"

#endif // ISOFIELD_ISOFIELD_HPP
