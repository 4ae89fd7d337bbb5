/*
 * c2g.h: C interface to the cost-to-go workbench.
 *
 * Every function returns a c2g_status. On failure a message is available from
 * c2g_last_error() on the calling thread until the next failing call there.
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with c2g_string_free().
 */
#ifndef C2G_H
#define C2G_H

#include <stddef.h>
#include <stdint.h>

#if defined(C2G_BUILDING_LIBRARY)
#define C2G_API __attribute__ ((visibility ("default")))
#else
#define C2G_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum c2g_status
{
    C2G_OK = 0,
    C2G_ERR_INVALID_ARGUMENT = 1,
    C2G_ERR_INFEASIBLE = 2,
    C2G_ERR_IO = 3,
    C2G_ERR_COLLISION = 4,
    C2G_PARTIAL = 5, /* some work items failed; outputs for the rest were written */
    C2G_ERR_INTERNAL = 6
} c2g_status;

typedef struct c2g_robot c2g_robot;
typedef struct c2g_workspace c2g_workspace;
typedef struct c2g_network c2g_network;

C2G_API const char *c2g_version (void);
C2G_API const char *c2g_last_error (void);
C2G_API void c2g_string_free (char *s);
/* Process exit code for a status: 0 ok, 2 invalid input or infeasible, 1 otherwise. */
C2G_API int c2g_exit_code (c2g_status s);
/* 0 trace .. 6 off */
C2G_API void c2g_set_log_level (int level);

/* Robots: a preset name ("planar2", "yaw_pitch3") or a JSON object. */
C2G_API c2g_status c2g_robot_create (const char *json, c2g_robot **out);
C2G_API void c2g_robot_free (c2g_robot *r);
C2G_API size_t c2g_robot_dof (const c2g_robot *r);

C2G_API c2g_status c2g_workspace_from_json (const char *json, c2g_workspace **out);
/* spec_json may be NULL or "{}" for the default generator settings. */
C2G_API c2g_status c2g_workspace_generate (const char *spec_json, uint64_t seed, c2g_workspace **out);
C2G_API c2g_status c2g_workspace_to_json (const c2g_workspace *w, char **out);
C2G_API void c2g_workspace_free (c2g_workspace *w);

C2G_API c2g_status c2g_config_in_collision (const c2g_robot *r, const c2g_workspace *w, const double *q, size_t dof, int *out);

/* Trained hypernetwork checkpoint. */
C2G_API c2g_status c2g_network_load (const char *path, c2g_network **out);
C2G_API void c2g_network_free (c2g_network *n);
C2G_API size_t c2g_network_dof (const c2g_network *n);
/* Cost-to-go in radians between q1 and q2 in workspace w. */
C2G_API c2g_status c2g_network_cost (const c2g_network *n, const c2g_workspace *w, const double *q1, const double *q2, size_t dof, uint64_t seed,
                                     double *out);

/*
 * Commands. Each takes a JSON config and returns a JSON report.
 * gen_data returns C2G_PARTIAL when some workspaces failed (they are listed in
 * the manifest); plan returns C2G_PARTIAL when no valid trajectory was found.
 */
C2G_API c2g_status c2g_gen_data (const char *config_json, char **report_json);
C2G_API c2g_status c2g_train (const char *config_json, char **report_json);
C2G_API c2g_status c2g_bench (const char *config_json, char **report_json);
C2G_API c2g_status c2g_plan (const char *config_json, char **result_json);
C2G_API c2g_status c2g_export_costmap (const char *config_json, char **meta_json);

#ifdef __cplusplus
}
#endif

#endif
