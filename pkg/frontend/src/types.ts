/** Wire types for the four read-only specsearch endpoints. */

export type Method = "baseline" | "gt" | "pred";

export interface Meta {
  dataset: string;
  size: number;
  pool_size: number;
  scores: string[];
  methods: Method[];
}

export interface SearchResult {
  rank: number;
  image_id: string;
  relevance: number;
  specificity: number;
}

export interface SearchResponse {
  query: string;
  method: Method;
  results: SearchResult[];
}

export interface BrowseImage {
  id: string;
  reference: string;
  scores: Record<string, number>;
}

export interface BrowseResponse {
  count: number;
  images: BrowseImage[];
}

export interface ImageDetail {
  id: string;
  reference: string;
  descriptions: string[];
  scores: Record<string, number>;
  annotations: Record<string, number>;
}

export interface ApiErrorBody {
  error: string;
}
