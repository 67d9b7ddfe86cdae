#pragma once

#include "relaybf/channel.hpp"
#include "relaybf/errors.hpp"
#include "relaybf/indiv_diag.hpp"
#include "relaybf/indiv_qcqp.hpp"
#include "relaybf/indiv_search.hpp"
#include "relaybf/numerics.hpp"
#include "relaybf/oracle.hpp"
#include "relaybf/reproduce.hpp"
#include "relaybf/sdp.hpp"
#include "relaybf/total_power.hpp"
#include "relaybf/trace.hpp"
