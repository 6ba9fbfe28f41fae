#pragma once

#include "bdz/cfrac.hpp"
#include "bdz/errors.hpp"
#include "bdz/factor.hpp"
#include "bdz/mat2.hpp"
#include "bdz/opoly.hpp"
#include "bdz/seqcore.hpp"
#include "bdz/spectral.hpp"
#include "bdz/verify.hpp"
