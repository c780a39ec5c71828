/**
 * Training and prediction over exported feature/label file pairs.
 *
 * Optimization is Adam with decoupled weight decay (weights are scaled by
 * 1 - lr * decay before every update), one full-image step per pair per
 * epoch, fully deterministic for a fixed seed.
 */

import * as fs from 'fs';
import * as tf from '@tensorflow/tfjs';

import { FeatureTensor, LabelMap, readFeatureFile, readLabelFile, writePgm } from './formats';
import { FcnConfig, SkipFcn } from './model';

export interface HarnessConfig {
  featureFiles: string[];
  labelFiles: string[];
  epochs: number;
  learningRate: number;
  weightDecay: number;
  beta1: number;
  beta2: number;
  epsilon: number;
  widths: [number, number, number];
  seed: number;
}

export const DEFAULTS = {
  epochs: 50,
  learningRate: 1e-3,
  weightDecay: 1e-4,
  beta1: 0.95,
  beta2: 0.999,
  epsilon: 1e-8,
  widths: [16, 16, 16] as [number, number, number],
  seed: 0,
};

export interface Checkpoint {
  format: 'ewtex-fcn-checkpoint';
  version: 1;
  inputChannels: number;
  numClasses: number;
  widths: [number, number, number];
  seed: number;
  weights: number[][];
}

export interface TrainingLog {
  epochLosses: number[];
  finalLoss: number;
  trainingAccuracy: number;
}

interface Pair {
  features: FeatureTensor;
  labels: LabelMap;
}

function loadPairs(cfg: HarnessConfig): Pair[] {
  if (cfg.featureFiles.length < 1 || cfg.featureFiles.length !== cfg.labelFiles.length) {
    throw new Error('need at least one feature/label file pair, one label file per feature file');
  }
  const pairs: Pair[] = [];
  for (let i = 0; i < cfg.featureFiles.length; i++) {
    const features = readFeatureFile(cfg.featureFiles[i]);
    const labels = readLabelFile(cfg.labelFiles[i]);
    if (features.height !== labels.height || features.width !== labels.width) {
      throw new Error(
        `${cfg.featureFiles[i]}: grid ${features.height}x${features.width} does not match ` +
          `labels ${labels.height}x${labels.width}`
      );
    }
    if (pairs.length > 0 && features.channels !== pairs[0].features.channels) {
      throw new Error(`${cfg.featureFiles[i]}: feature count differs from the first file`);
    }
    pairs.push({ features, labels });
  }
  return pairs;
}

function featureTensor(f: FeatureTensor): tf.Tensor4D {
  return tf.tensor4d(f.values, [1, f.height, f.width, f.channels]);
}

function labelTensor(l: LabelMap, numClasses: number): tf.Tensor4D {
  const flat = tf.tensor1d(Int32Array.from(l.labels), 'int32');
  return tf.tidy(() =>
    tf.oneHot(flat, numClasses).reshape([1, l.height, l.width, numClasses])
  ) as tf.Tensor4D;
}

export function trainHarness(cfg: HarnessConfig): { checkpoint: Checkpoint; log: TrainingLog } {
  const pairs = loadPairs(cfg);
  const numClasses = Math.max(2, ...pairs.map((p) => p.labels.numClasses));
  const modelCfg: FcnConfig = {
    inputChannels: pairs[0].features.channels,
    numClasses,
    widths: cfg.widths,
    seed: cfg.seed,
  };
  const net = new SkipFcn(modelCfg);
  net.build(pairs[0].features.height, pairs[0].features.width);

  const optimizer = tf.train.adam(cfg.learningRate, cfg.beta1, cfg.beta2, cfg.epsilon);
  const inputs = pairs.map((p) => featureTensor(p.features));
  const targets = pairs.map((p) => labelTensor(p.labels, numClasses));

  const decay = 1 - cfg.learningRate * cfg.weightDecay;
  const epochLosses: number[] = [];
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    let epochLoss = 0;
    for (let i = 0; i < pairs.length; i++) {
      for (const w of net.trainableWeights()) {
        const scaled = w.mul(decay);
        w.assign(scaled);
        scaled.dispose();
      }
      const loss = optimizer.minimize(
        () => tf.losses.softmaxCrossEntropy(targets[i], net.logits(inputs[i])) as tf.Scalar,
        true,
        net.trainableWeights()
      ) as tf.Scalar;
      epochLoss += loss.dataSync()[0];
      loss.dispose();
    }
    epochLosses.push(epochLoss / pairs.length);
    if (!Number.isFinite(epochLosses[epochLosses.length - 1])) {
      throw new Error(`training diverged at epoch ${epoch}`);
    }
  }

  let correct = 0;
  let total = 0;
  for (let i = 0; i < pairs.length; i++) {
    const pred = tf.tidy(() => net.logits(inputs[i]).argMax(-1).dataSync());
    const truth = pairs[i].labels.labels;
    for (let j = 0; j < truth.length; j++) {
      if (pred[j] === truth[j]) correct++;
    }
    total += truth.length;
  }

  inputs.forEach((t) => t.dispose());
  targets.forEach((t) => t.dispose());
  optimizer.dispose();

  return {
    checkpoint: {
      format: 'ewtex-fcn-checkpoint',
      version: 1,
      inputChannels: modelCfg.inputChannels,
      numClasses,
      widths: cfg.widths,
      seed: cfg.seed,
      weights: net.getWeightValues(),
    },
    log: {
      epochLosses,
      finalLoss: epochLosses.length > 0 ? epochLosses[epochLosses.length - 1] : NaN,
      trainingAccuracy: total > 0 ? correct / total : 0,
    },
  };
}

export function saveCheckpoint(path: string, checkpoint: Checkpoint): void {
  fs.writeFileSync(path, JSON.stringify(checkpoint));
}

export function loadCheckpoint(path: string): Checkpoint {
  const doc = JSON.parse(fs.readFileSync(path, 'utf-8'));
  if (doc.format !== 'ewtex-fcn-checkpoint' || doc.version !== 1) {
    throw new Error(`${path}: not a recognized checkpoint`);
  }
  return doc as Checkpoint;
}

export function restoreModel(checkpoint: Checkpoint, height: number, width: number): SkipFcn {
  const net = new SkipFcn({
    inputChannels: checkpoint.inputChannels,
    numClasses: checkpoint.numClasses,
    widths: checkpoint.widths,
    seed: checkpoint.seed,
  });
  net.build(height, width);
  net.setWeightValues(checkpoint.weights);
  return net;
}

export function predictHarness(checkpoint: Checkpoint, featurePath: string, outPath: string): void {
  const features = readFeatureFile(featurePath);
  if (features.channels !== checkpoint.inputChannels) {
    throw new Error(
      `${featurePath}: ${features.channels} features but checkpoint expects ${checkpoint.inputChannels}`
    );
  }
  if (checkpoint.numClasses > 256) {
    throw new Error('PGM output supports at most 256 classes');
  }
  const net = restoreModel(checkpoint, features.height, features.width);
  const input = featureTensor(features);
  const pred = tf.tidy(() => net.logits(input).argMax(-1).dataSync());
  input.dispose();
  writePgm(outPath, Uint8Array.from(pred), features.height, features.width);
}
