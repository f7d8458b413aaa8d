/** CLI: `node dist/main.js render <recipe.json>` renders every figure. */

import { SchemaError } from "./csv.js";
import { RecipeError, loadRecipe } from "./recipe.js";
import { renderFigure } from "./render.js";
import { dirname, resolve } from "node:path";

export function main(argv: string[]): number {
  if (argv.length !== 2 || argv[0] !== "render") {
    console.error("usage: render <recipe.json>");
    return 2;
  }
  const recipePath = resolve(argv[1]);
  try {
    const recipe = loadRecipe(recipePath);
    const base = dirname(recipePath);
    for (const figure of recipe.figures) {
      const result = renderFigure(figure, base);
      for (const out of result.outputs) console.log(out);
    }
    return 0;
  } catch (err) {
    if (err instanceof RecipeError || err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 4;
    }
    throw err;
  }
}

process.exitCode = main(process.argv.slice(2));
