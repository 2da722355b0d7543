import { z } from "zod";

// Wire types for the session service. Everything the UI shows is parsed
// from these; the client never invents world state on its own.

export const VoxelSchema = z.object({
  row: z.number().int(),
  col: z.number().int(),
  height: z.number().int(),
  color: z.string(),
});

export const PositionSchema = z.tuple([
  z.number().int(),
  z.number().int(),
  z.number().int(),
]);

export const WorldSchema = z.object({
  voxels: z.array(VoxelSchema),
  selection: z.array(PositionSchema),
});

// diff.selection is the full selection after the action, not a delta
export const DiffSchema = z.object({
  added: z.array(VoxelSchema),
  removed: z.array(PositionSchema),
  changed: z.array(VoxelSchema),
  selection: z.array(PositionSchema),
});

export const CandidateSchema = z.object({
  index: z.number().int(),
  program: z.string(),
  score: z.number(),
  core_only: z.boolean(),
  rules: z.array(z.number().int()),
  diff: DiffSchema,
});

export const SubmitResponseSchema = z.object({
  status: z.enum(["candidates", "unparsable"]),
  utterance: z.string(),
  define_depth: z.number().int(),
  candidates: z.array(CandidateSchema),
});

export const AcceptResponseSchema = z.object({
  accepted: z.number().int(),
  program: z.string(),
  world: WorldSchema,
  diff: DiffSchema,
  define_depth: z.number().int(),
});

export const RuleSchema = z.object({
  id: z.number().int(),
  lhs: z.string(),
  rhs: z.string(),
  template: z.string().nullable(),
  author: z.string(),
  core: z.boolean(),
  use_count: z.number().int(),
  used_by_other: z.boolean(),
  citations: z.number().int(),
});

export const DefineAcceptResponseSchema = z.object({
  head: z.string(),
  rules: z.array(RuleSchema),
  redundant: z.boolean(),
  world: WorldSchema,
  define_depth: z.number().int(),
});

export const DefineCancelResponseSchema = z.object({
  define_depth: z.number().int(),
});

export const StateSchema = z.object({
  world: WorldSchema,
  define_depths: z.record(z.string(), z.number().int()),
  pending_users: z.array(z.string()),
  interactions: z.number().int(),
});

const MetricsWindowSchema = z.object({
  window_start: z.number().int(),
  count: z.number().int(),
  frac_core: z.number(),
  frac_induced: z.number(),
  frac_unparsable: z.number(),
  program_utterance_ratio: z.number(),
});

export const MetricsSchema = z.object({
  count: z.number().int(),
  frac_core: z.number(),
  frac_induced: z.number(),
  frac_unparsable: z.number(),
  program_utterance_ratio: z.number(),
  windows: z.array(MetricsWindowSchema),
  window_size: z.number().int(),
  accepted_total: z.number().int(),
  accepted_induced_fraction: z.number(),
  rule_counts: z.object({ core: z.number().int(), induced: z.number().int() }),
  citations: z.array(z.object({ author: z.string(), citations: z.number().int() })),
});

export const GrammarResponseSchema = z.object({ rules: z.array(RuleSchema) });

export const SessionsResponseSchema = z.object({ sessions: z.array(z.string()) });

export const SessionCreatedSchema = z.object({ session: z.string() });

export type Voxel = z.infer<typeof VoxelSchema>;
export type PositionTuple = z.infer<typeof PositionSchema>;
export type World = z.infer<typeof WorldSchema>;
export type Diff = z.infer<typeof DiffSchema>;
export type Candidate = z.infer<typeof CandidateSchema>;
export type SubmitResponse = z.infer<typeof SubmitResponseSchema>;
export type AcceptResponse = z.infer<typeof AcceptResponseSchema>;
export type Rule = z.infer<typeof RuleSchema>;
export type DefineAcceptResponse = z.infer<typeof DefineAcceptResponseSchema>;
export type SessionState = z.infer<typeof StateSchema>;
export type Metrics = z.infer<typeof MetricsSchema>;
export type MetricsWindow = z.infer<typeof MetricsWindowSchema>;

const posKey = (row: number, col: number, height: number) => `${row},${col},${height}`;

/** The world a candidate would leave behind, reconstructed from the server's
    diff against the base world. */
export function applyDiff(world: World, diff: Diff): World {
  const cells = new Map<string, Voxel>(
    world.voxels.map((v) => [posKey(v.row, v.col, v.height), v]),
  );
  for (const [row, col, height] of diff.removed) {
    cells.delete(posKey(row, col, height));
  }
  for (const v of [...diff.changed, ...diff.added]) {
    cells.set(posKey(v.row, v.col, v.height), v);
  }
  return { voxels: [...cells.values()], selection: diff.selection };
}

/** One-line description of a candidate's effect, e.g. "+2 -0 ~1 sel 3". */
export function diffSummary(diff: Diff): string {
  return `+${diff.added.length} -${diff.removed.length} ~${diff.changed.length}`
    + ` sel ${diff.selection.length}`;
}
