#pragma once

// Umbrella header: usage-based construction grammar induction and the
// exposure experiment harness built on it.

#include "cxg/annotate.hpp"
#include "cxg/assoc.hpp"
#include "cxg/corpus.hpp"
#include "cxg/digest.hpp"
#include "cxg/error.hpp"
#include "cxg/exposure.hpp"
#include "cxg/grammar.hpp"
#include "cxg/induct.hpp"
#include "cxg/manifest.hpp"
#include "cxg/mdl.hpp"
#include "cxg/metrics.hpp"
#include "cxg/parallel.hpp"
#include "cxg/rng.hpp"
#include "cxg/slot.hpp"
