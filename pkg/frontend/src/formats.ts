/**
 * Binary interchange formats shared with the feature-extraction pipeline.
 *
 * Feature tensors ("EWTF"): 4-byte magic, then version, height, width and
 * feature count as little-endian u32, then height*width*K little-endian
 * float32 values in row-major (pixel-major, feature-minor) order.
 * Label maps ("EWTL") carry the same header without the feature count and
 * height*width little-endian u16 class indices.
 */

import * as fs from 'fs';

export const FORMAT_VERSION = 1;

export interface FeatureTensor {
  height: number;
  width: number;
  channels: number;
  /** row-major [pixel][feature] values, length height*width*channels */
  values: Float32Array;
}

export interface LabelMap {
  height: number;
  width: number;
  numClasses: number;
  labels: Uint16Array;
}

function alignedCopy(buf: Buffer, offset: number, byteLength: number): ArrayBuffer {
  // fs buffers may sit at unaligned offsets of a shared pool
  const out = new ArrayBuffer(byteLength);
  new Uint8Array(out).set(buf.subarray(offset, offset + byteLength));
  return out;
}

export function readFeatureFile(path: string): FeatureTensor {
  const buf = fs.readFileSync(path);
  if (buf.length < 20 || buf.toString('ascii', 0, 4) !== 'EWTF') {
    throw new Error(`${path}: not a feature file`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new Error(`${path}: unsupported feature format version ${version}`);
  }
  const height = buf.readUInt32LE(8);
  const width = buf.readUInt32LE(12);
  const channels = buf.readUInt32LE(16);
  const count = height * width * channels;
  if (buf.length !== 20 + 4 * count) {
    throw new Error(`${path}: truncated feature payload`);
  }
  const values = new Float32Array(alignedCopy(buf, 20, 4 * count));
  return { height, width, channels, values };
}

export function readLabelFile(path: string): LabelMap {
  const buf = fs.readFileSync(path);
  if (buf.length < 16 || buf.toString('ascii', 0, 4) !== 'EWTL') {
    throw new Error(`${path}: not a label file`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new Error(`${path}: unsupported label format version ${version}`);
  }
  const height = buf.readUInt32LE(8);
  const width = buf.readUInt32LE(12);
  const count = height * width;
  if (buf.length !== 16 + 2 * count) {
    throw new Error(`${path}: truncated label payload`);
  }
  const labels = new Uint16Array(alignedCopy(buf, 16, 2 * count));
  let max = 0;
  for (const v of labels) {
    if (v > max) max = v;
  }
  return { height, width, numClasses: max + 1, labels };
}

export function writePgm(path: string, labels: Uint8Array, height: number, width: number): void {
  if (labels.length !== height * width) {
    throw new Error('label buffer does not match the stated dimensions');
  }
  const header = Buffer.from(`P5\n${width} ${height}\n255\n`, 'ascii');
  fs.writeFileSync(path, Buffer.concat([header, Buffer.from(labels)]));
}

export function readPgm(path: string): { height: number; width: number; pixels: Uint8Array } {
  const buf = fs.readFileSync(path);
  if (buf.toString('ascii', 0, 2) !== 'P5') {
    throw new Error(`${path}: not a binary PGM`);
  }
  // header: three whitespace-separated tokens, '#' comments allowed
  const tokens: number[] = [];
  let i = 2;
  while (tokens.length < 3) {
    while (i < buf.length && /\s/.test(String.fromCharCode(buf[i]))) i++;
    if (buf[i] === 0x23) {
      while (i < buf.length && buf[i] !== 0x0a) i++;
      continue;
    }
    let tok = '';
    while (i < buf.length && !/\s/.test(String.fromCharCode(buf[i]))) {
      tok += String.fromCharCode(buf[i]);
      i++;
    }
    tokens.push(parseInt(tok, 10));
  }
  i++; // single whitespace after maxval
  const [width, height] = [tokens[0], tokens[1]];
  const pixels = new Uint8Array(buf.subarray(i, i + width * height));
  if (pixels.length !== width * height) {
    throw new Error(`${path}: truncated PGM payload`);
  }
  return { height, width, pixels };
}
