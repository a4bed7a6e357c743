from ultralocal.sdp.data import InvalidProblem, SdpData, to_sdp_data
from ultralocal.sdp.interior_point import InteriorPointSolver, IpmResult
from ultralocal.sdp.linalg import NotSymmetric, min_eig, smat, svec, svec_basis, symmetrize
from ultralocal.sdp.sdpa import read_sdpa, write_sdpa
from ultralocal.sdp.solution import Residuals, SdpSolution, SdpStatus, SolverSettings
from ultralocal.sdp.solver import constraint_margin, solve, solve_data
