/**
 * Command line entry: `train` fits the skip-FCN on feature/label file
 * pairs and writes a JSON checkpoint plus a training log; `predict`
 * loads a checkpoint and writes a PGM class map for a feature file.
 */

import * as fs from 'fs';

import {
  DEFAULTS,
  HarnessConfig,
  loadCheckpoint,
  predictHarness,
  saveCheckpoint,
  trainHarness,
} from './harness';

interface Parsed {
  command: string;
  lists: Map<string, string[]>;
}

function parseArgv(argv: string[]): Parsed {
  if (argv.length === 0 || argv[0].startsWith('--')) {
    throw new Error('usage: main.js <train|predict> --flag value ...');
  }
  const lists = new Map<string, string[]>();
  let key: string | null = null;
  for (const tok of argv.slice(1)) {
    if (tok.startsWith('--')) {
      key = tok.slice(2);
      if (!lists.has(key)) lists.set(key, []);
    } else {
      if (key === null) throw new Error(`stray argument ${tok}`);
      lists.get(key)!.push(tok);
    }
  }
  return { command: argv[0], lists };
}

function one(p: Parsed, key: string, fallback?: string): string {
  const vals = p.lists.get(key);
  if (!vals || vals.length === 0) {
    if (fallback !== undefined) return fallback;
    throw new Error(`missing --${key}`);
  }
  return vals[vals.length - 1];
}

function many(p: Parsed, key: string): string[] {
  const vals = p.lists.get(key);
  if (!vals || vals.length === 0) throw new Error(`missing --${key}`);
  return vals;
}

function runTrain(p: Parsed): void {
  const widths = one(p, 'widths', DEFAULTS.widths.join(','))
    .split(',')
    .map((s) => parseInt(s, 10));
  if (widths.length !== 3 || widths.some((w) => !Number.isFinite(w))) {
    throw new Error('--widths expects three comma-separated integers');
  }
  const cfg: HarnessConfig = {
    featureFiles: many(p, 'features'),
    labelFiles: many(p, 'labels'),
    epochs: parseInt(one(p, 'epochs', String(DEFAULTS.epochs)), 10),
    learningRate: parseFloat(one(p, 'lr', String(DEFAULTS.learningRate))),
    weightDecay: parseFloat(one(p, 'weight-decay', String(DEFAULTS.weightDecay))),
    beta1: parseFloat(one(p, 'beta1', String(DEFAULTS.beta1))),
    beta2: parseFloat(one(p, 'beta2', String(DEFAULTS.beta2))),
    epsilon: DEFAULTS.epsilon,
    widths: widths as [number, number, number],
    seed: parseInt(one(p, 'seed', String(DEFAULTS.seed)), 10),
  };
  const out = one(p, 'out');
  const { checkpoint, log } = trainHarness(cfg);
  saveCheckpoint(out, checkpoint);
  const logPath = one(p, 'log', out.replace(/\.json$/, '') + '.log.json');
  fs.writeFileSync(logPath, JSON.stringify(log));
  console.log(
    `trained ${cfg.epochs} epochs, final loss ${log.finalLoss.toFixed(6)}, ` +
      `training accuracy ${(100 * log.trainingAccuracy).toFixed(2)}%`
  );
}

function runPredict(p: Parsed): void {
  const checkpoint = loadCheckpoint(one(p, 'checkpoint'));
  predictHarness(checkpoint, one(p, 'features'), one(p, 'out'));
}

export function main(argv: string[]): number {
  try {
    const parsed = parseArgv(argv);
    if (parsed.command === 'train') {
      runTrain(parsed);
    } else if (parsed.command === 'predict') {
      runPredict(parsed);
    } else {
      throw new Error(`unknown command ${parsed.command}`);
    }
    return 0;
  } catch (err) {
    console.error(`ewtex-frontend: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
