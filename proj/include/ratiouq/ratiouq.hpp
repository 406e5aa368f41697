#pragma once

#include "ratiouq/betaprime.hpp"
#include "ratiouq/errors.hpp"
#include "ratiouq/kernel.hpp"
#include "ratiouq/ncg.hpp"
#include "ratiouq/permanental.hpp"
#include "ratiouq/ratio.hpp"
#include "ratiouq/summary.hpp"
#include "ratiouq/synthetic.hpp"
#include "ratiouq/uq.hpp"
