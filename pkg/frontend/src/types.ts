// Response shapes of the engine API (schemas/responses.json in the repo root).

export interface Registered {
  user_id: string;
  email: string;
  token: string;
  created_at: string;
}

export interface ContentSummary {
  id: string;
  title: string;
  canonical_link: string;
  body_text: string;
  links: string[];
  image_urls: string[];
  video_urls: string[];
  publish_date: string;
  category: string;
  media_kind: "article" | "image" | "video" | "mixed";
  source_id: string;
  keywords: string[];
}

export interface MagazineSlot {
  content: ContentSummary;
  matched_keywords: string[];
  score: number;
}

export interface MagazinePageResponse {
  user_id: string;
  cold_start: boolean;
  page_number: number;
  total_pages: number;
  total_items: number;
  generated_at: string;
  slots: MagazineSlot[];
}

export interface InterestEntry {
  keyword: string;
  weight: number;
  tier: "Low" | "Mid" | "High";
  origin: string;
  visibility: "public" | "private";
  last_touched: string;
}

export interface InterestList {
  user_id: string;
  list_visibility: "public" | "partial" | "private";
  interests: InterestEntry[];
}

export interface Recommendation {
  keyword: string;
  score: number;
  reason: "own_mid_tier" | "similar_user";
  contributing_user: string | null;
}

export interface SavedRow {
  content_id: string;
  saved_at: string;
  rating: number | null;
  content: ContentSummary;
}

export interface SharePayload {
  title: string;
  link: string;
  text_snippet: string;
}

export interface ApiErrorBody {
  error: { code: number; message: string };
}
