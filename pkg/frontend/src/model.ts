/**
 * Toy dense-prediction network: three convolutional blocks with skip
 * connections taken from every (shallow) block.  Each block feeds a 1x1
 * class head; deeper heads are upsampled back to the input grid and all
 * heads are summed into per-pixel logits, so the output always matches
 * the input dimensions.
 */

import * as tf from '@tensorflow/tfjs';

export interface FcnConfig {
  inputChannels: number;
  numClasses: number;
  /** channel widths of the three blocks */
  widths: [number, number, number];
  seed: number;
}

export class SkipFcn {
  readonly config: FcnConfig;
  private blocks: tf.layers.Layer[] = [];
  private heads: tf.layers.Layer[] = [];
  private pools: tf.layers.Layer[] = [];

  constructor(config: FcnConfig) {
    if (config.widths.some((w) => w < 1 || w > 64)) {
      throw new Error('block widths must lie in 1..64');
    }
    this.config = config;
    let seed = config.seed;
    const conv = (filters: number, kernel: number) =>
      tf.layers.conv2d({
        filters,
        kernelSize: kernel,
        padding: 'same',
        activation: kernel === 1 ? undefined : 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed: seed++ }),
        biasInitializer: 'zeros',
      });
    for (let b = 0; b < 3; b++) {
      this.blocks.push(conv(config.widths[b], 3));
      this.heads.push(conv(config.numClasses, 1));
      if (b < 2) {
        this.pools.push(tf.layers.maxPooling2d({ poolSize: 2, strides: 2, padding: 'same' }));
      }
    }
  }

  /** Per-pixel class logits of shape [batch, height, width, classes]. */
  logits(features: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      const [, height, width] = features.shape;
      let x = features as tf.Tensor4D;
      const headOutputs: tf.Tensor4D[] = [];
      for (let b = 0; b < 3; b++) {
        x = this.blocks[b].apply(x) as tf.Tensor4D;
        let head = this.heads[b].apply(x) as tf.Tensor4D;
        if (head.shape[1] !== height || head.shape[2] !== width) {
          head = tf.image.resizeNearestNeighbor(head, [height, width]);
        }
        headOutputs.push(head);
        if (b < 2) {
          x = this.pools[b].apply(x) as tf.Tensor4D;
        }
      }
      return tf.addN(headOutputs);
    });
  }

  trainableWeights(): tf.Variable[] {
    const vars: tf.Variable[] = [];
    for (const layer of [...this.blocks, ...this.heads]) {
      for (const w of layer.getWeights()) {
        vars.push(w as tf.Variable);
      }
    }
    return vars;
  }

  /** Force layer variable creation on a given grid size. */
  build(height: number, width: number): void {
    const probe = tf.zeros([1, height, width, this.config.inputChannels]) as tf.Tensor4D;
    this.logits(probe).dispose();
    probe.dispose();
  }

  getWeightValues(): number[][] {
    return this.trainableWeights().map((w) => Array.from(w.dataSync()));
  }

  setWeightValues(values: number[][]): void {
    const vars = this.trainableWeights();
    if (vars.length !== values.length) {
      throw new Error(`checkpoint holds ${values.length} tensors, model has ${vars.length}`);
    }
    vars.forEach((w, i) => {
      const flat = Float32Array.from(values[i]);
      if (flat.length !== w.size) {
        throw new Error(`weight ${i}: size ${flat.length} does not match ${w.size}`);
      }
      w.assign(tf.tensor(flat, w.shape));
    });
  }
}
