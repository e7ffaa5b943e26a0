export type { InstanceDetail } from './types.js';

export interface StreamHandleLike {
  close(): void;
  done: Promise<void>;
}
