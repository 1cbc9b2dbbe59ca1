#!/usr/bin/env node
import { readFileSync, writeFileSync } from 'node:fs';
import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';
import { parseFigureSpec } from './spec.js';
import { render, SchemaError } from './render.js';

function usage(): void {
  console.error('usage: wavefront-figures render --spec <figure-spec.json>');
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== 'render') {
    usage();
    return 2;
  }
  let specPath: string | undefined;
  try {
    const parsed = parseArgs({
      args: rest,
      options: { spec: { type: 'string' } },
    });
    specPath = parsed.values.spec;
  } catch (err) {
    console.error((err as Error).message);
    usage();
    return 2;
  }
  if (!specPath) {
    usage();
    return 2;
  }
  try {
    const spec = parseFigureSpec(readFileSync(specPath, 'utf8'));
    const csvText = readFileSync(spec.input, 'utf8');
    const svg = render(spec, csvText);
    writeFileSync(spec.output, svg);
    console.log(spec.output);
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return err instanceof SchemaError ? 2 : 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
