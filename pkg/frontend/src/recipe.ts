/** Figure recipe schema: one file lists any number of figures. */

import { readFileSync } from "node:fs";

import { z } from "zod";

export const FigureSchema = z
  .object({
    kind: z.enum(["heatmap", "line", "multi-line"]),
    input: z.string().min(1),
    output: z.string().min(1),
    title: z.string().optional(),
    x_label: z.string().optional(),
    y_label: z.string().optional(),
    // heatmap inputs
    channel: z.enum(["FF", "FB", "BF", "BB"]).optional(),
    value_column: z.string().optional(),
    log_scale: z.boolean().optional(),
    log_floor: z.number().positive().optional(),
    stride: z.number().int().min(1).optional(),
    scale_px: z.number().int().min(1).max(16).optional(),
    // line inputs
    x: z.string().optional(),
    y: z.union([z.string(), z.array(z.string()).min(1)]).optional(),
    theta: z.number().optional(),
    log_y: z.boolean().optional(),
    annotate_dip: z.boolean().optional(),
  })
  .strict();

export const RecipeSchema = z
  .object({ figures: z.array(FigureSchema).min(1) })
  .strict();

export type Figure = z.infer<typeof FigureSchema>;
export type Recipe = z.infer<typeof RecipeSchema>;

export class RecipeError extends Error {}

export function loadRecipe(path: string): Recipe {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new RecipeError(`${path}: ${(err as Error).message}`);
  }
  const parsed = RecipeSchema.safeParse(doc);
  if (!parsed.success) {
    const first = parsed.error.issues[0];
    const where = first.path.join(".") || "<root>";
    throw new RecipeError(`${path}: ${where}: ${first.message}`);
  }
  return parsed.data;
}
