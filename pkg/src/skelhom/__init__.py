"""Approximation of fractional Sobolev maps by piecewise homogeneous maps on
cubical meshes: mesh/skeleton geometry, radial extensions, Monte-Carlo Sobolev
metrics, manifold targets, the skeleton Lipschitz-approximation pipeline, and
an experiment harness."""

from .errors import (ConfigError, ExceptionalPoint, OutOfBounds, OutsideTube,
                     SingularPoint, SkelhomError, TubeEscape, Undersampled,
                     WindowEscapes)
from .extension import (ProjectionResult, eval_extension, extend_skeleton_map,
                        extension_gradient, extension_values, project_points,
                        project_step, project_to_skeleton)
from .fields import (FIELD_NAMES, FieldMap, constant_field, gauss_bump_field,
                     grid_field, linear_x1_field, make_field,
                     s1_phase_bump_field, vortex_field)
from .manifolds import (ManifoldTarget, circle_points, in_tube,
                        nearest_point_projection, project_field, sphere_target,
                        target_from_config, uniform_tube_check, vortex_map,
                        winding_number)
from .mesh import (Box, Face, MeshSpec, Sector, SkeletonPoint, cube_of,
                   dual_skeleton_distance, dual_skeleton_distances,
                   enumerate_skeleton_cubes, local_coords, sector_of,
                   skeleton_faces)
from .metrics import (NormReport, QuadratureSpec, SkeletonDomain,
                      SobolevParams, cross_term, gagliardo_seminorm_p,
                      kernel_k, lp_norm, skeleton_gagliardo_p, skeleton_lp_p,
                      verify_kernel_bound, w1r_seminorm, wsp_distance,
                      wspj_membership)
from .pipeline import (CutoffProfile, MollifierSpec, PipelineStage,
                       blend_lipschitz, fill_hole, lipschitz_approximate,
                       mollify_on_cube, thme_pipeline)
from .experiments import (ConvergenceReport, ExperimentConfig, emit_report,
                          run_convergence, run_degree_demo,
                          run_kernel_verification, run_pipeline,
                          run_w11_failure, select_good_T)

__version__ = "0.1.0"
