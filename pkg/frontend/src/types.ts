export interface RleLabels {
  width: number;
  height: number;
  runs: [number, number][];
}

export type Chain = [number, number][];

export interface SessionCreated {
  session_id: string;
  width: number;
  height: number;
  num_superpixels: number;
  labels: RleLabels;
  boundaries: Chain[];
}

export interface LabelState {
  kind: "superpixels" | "classes";
  labels: RleLabels;
  classes: Record<string, number>;
  num_regions: number;
  boundaries: Chain[];
  num_markers: number;
}

export interface Marker {
  x: number;
  y: number;
  cls: string;
}
