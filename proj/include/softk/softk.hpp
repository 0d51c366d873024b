#pragma once

#include "softk/error.hpp"
#include "softk/sexpr.hpp"
#include "softk/term.hpp"
#include "softk/registry.hpp"
#include "softk/kernel.hpp"
#include "softk/instantiate.hpp"
#include "softk/eval.hpp"
#include "softk/events.hpp"
#include "softk/refine.hpp"
#include "softk/session.hpp"
